"""性能测试包.

使用 pytest-benchmark 测量模拟与估计热点路径的耗时.
"""
