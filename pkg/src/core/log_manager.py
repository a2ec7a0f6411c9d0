"""
日志管理模块

负责统一的日志记录和管理，包括:
1. 分级日志记录
2. 日志文件轮转（配置了 logging.path 时）
3. 日志格式化输出
"""

import os
import sys
import logging
import logging.handlers
from typing import Optional, Union

from .config_manager import ConfigManager, config_manager

LOG_FILE_NAME = 'lamicone.log'


class LogManager:
    """日志管理器"""

    def __init__(self, config: Optional[ConfigManager] = None):
        """初始化日志管理器

        Args:
            config: 配置管理器，默认使用全局实例
        """
        self.config = config or config_manager
        self._load_settings()
        self._setup_logging()

    def _load_settings(self):
        """从配置读取日志参数"""
        self.log_path = self.config.get('logging.path') or ''
        self.log_level = self._parse_log_level(self.config.get('logging.level', 'INFO'))
        self.max_size = self._parse_size(self.config.get('logging.max_size', 10485760))
        self.backup_count = self.config.get('logging.backup_count', 5)
        self.log_format = self.config.get('logging.format',
            '%(asctime)s [%(levelname)s] %(name)s: %(message)s')

    def _parse_log_level(self, level: str) -> int:
        """解析日志级别

        Args:
            level: 日志级别字符串

        Returns:
            int: 日志级别数值
        """
        level_map = {
            'DEBUG': logging.DEBUG,
            'INFO': logging.INFO,
            'WARNING': logging.WARNING,
            'ERROR': logging.ERROR,
            'CRITICAL': logging.CRITICAL
        }
        return level_map.get(str(level).upper(), logging.INFO)

    def _parse_size(self, size: Union[int, str]) -> int:
        """解析文件大小

        Args:
            size: 大小，可以是整数（字节）或字符串（如 "10MB"）

        Returns:
            int: 字节数
        """
        if isinstance(size, int):
            return size

        if isinstance(size, str):
            # 先匹配长后缀，避免 "MB" 被 "B" 截断
            units = [
                ('GB', 1024 * 1024 * 1024),
                ('MB', 1024 * 1024),
                ('KB', 1024),
                ('B', 1)
            ]
            size_upper = size.strip().upper()
            for unit, multiplier in units:
                if size_upper.endswith(unit):
                    try:
                        number = float(size_upper[:-len(unit)])
                        return int(number * multiplier)
                    except ValueError:
                        break

        # 默认返回 10MB
        return 10 * 1024 * 1024

    def _setup_logging(self):
        """设置日志配置"""
        root_logger = logging.getLogger()
        root_logger.setLevel(self.log_level)

        # 清除现有的处理器
        for handler in root_logger.handlers[:]:
            root_logger.removeHandler(handler)

        formatter = logging.Formatter(self.log_format)

        # 控制台输出走 stderr，stdout 留给报告
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)

        if self.log_path:
            os.makedirs(self.log_path, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                os.path.join(self.log_path, LOG_FILE_NAME),
                maxBytes=self.max_size,
                backupCount=self.backup_count,
                encoding='utf-8'
            )
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)

    def get_logger(self, name: Optional[str] = None) -> logging.Logger:
        """获取日志器

        Args:
            name: 日志器名称，默认返回根日志器

        Returns:
            logging.Logger: 日志器实例
        """
        return logging.getLogger(name)

    def set_level(self, level: str):
        """设置日志级别

        Args:
            level: 日志级别
        """
        self.log_level = self._parse_log_level(level)
        logging.getLogger().setLevel(self.log_level)

    def reload(self):
        """重新加载日志配置"""
        try:
            self._load_settings()
            self._setup_logging()
        except Exception as e:
            logging.error(f"重新加载日志配置失败: {e}")
            raise
