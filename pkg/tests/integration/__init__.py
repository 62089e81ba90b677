"""集成测试包.

以完整预算运行实验, 验证模拟, 界估计与距离估计之间的一致性.

测试范围:
    - 零核下的精确界
    - 距离的 T^{-1/2} 衰减
    - 界对经验距离的控制
    - 命令行端到端运行与 manifest
"""
