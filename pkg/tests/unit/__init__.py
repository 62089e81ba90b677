"""单元测试包.

测试模块:
    - test_kernels: 激励核与更新方程测试
    - test_marks: 标记分布测试
    - test_rng: 随机流测试
    - test_simulation: 模拟与统计量测试
    - test_coupling: 耦合平移过程测试
    - test_moments: 矩计算测试
    - test_bounds: Stein 界测试
    - test_distance: Gaussian 距离测试
    - test_registry: 实验注册表测试
    - test_config: 配置解析测试
    - test_reports: 报告输出测试
    - test_harness: 实验编排测试
    - test_cli: 命令行测试
    - test_exceptions: 异常处理测试
    - test_types: 类型定义测试
"""
