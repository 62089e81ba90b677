"""测试包初始化模块.

此包包含了 hawkes-stein 的所有测试套件。

测试分类:
    - unit: 单元测试
    - integration: 端到端验收测试
    - performance: 性能测试

测试覆盖范围:
    - 激励核与标记分布
    - 稀疏化模拟与耦合平移过程
    - 精确矩与 Stein 界估计
    - Gaussian 距离与速率拟合
    - 配置, 报告与命令行
"""
