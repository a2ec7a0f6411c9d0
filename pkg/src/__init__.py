"""
lamicone 包

正卦限锥逆系统的精确有理计算：基与 Choquet 单纯形、射影极限证书、
列随机矩阵的奇数逼近，以及转移矩阵在嵌套穿孔圆盘上的弧系统实现。
"""

__version__ = "1.0.0"
