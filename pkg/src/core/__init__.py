"""
lamicone 核心模块

该模块包含系统的核心功能实现，包括：
- 配置管理与日志管理
- 精确有理矩阵与阶段生成规则
- 锥逆系统、极限证书、奇数逼近
- 弧系统实现、内置例子与报告输出
"""
