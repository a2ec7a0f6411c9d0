"""
配置管理模块

负责统一管理所有配置项，包括:
1. 加载和解析配置文件
2. 配置项验证（含精确有理数参数）
3. 环境变量与 .env 覆盖
4. 配置重载
"""

import os
import copy
import logging
from fractions import Fraction
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """配置值无法转换或不满足校验规则"""


class ConfigManager:
    """配置管理器"""

    # 配置项验证规则
    VALIDATION_RULES = {
        'analysis.horizon': {'type': int, 'min': 2, 'max': 100000},
        'analysis.tol': {'type': str, 'rational': True},
        'analysis.trivial_tol': {'type': str, 'rational': True},
        'analysis.stage': {'type': int, 'min': 1},
        'realization.eps0': {'type': str, 'rational': True},
        'svg.size': {'type': int, 'min': 64, 'max': 4096},
        'svg.template_dir': {'type': str},
        'logging.path': {'type': str},
        'logging.level': {'type': str, 'enum': ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']},
        'logging.backup_count': {'type': int, 'min': 1, 'max': 100},
        'task_queue.max_workers': {'type': int, 'min': 1, 'max': 64}
    }

    # 环境变量映射
    ENV_MAPPING = {
        'LAMICONE_HORIZON': 'analysis.horizon',
        'LAMICONE_TOL': 'analysis.tol',
        'LAMICONE_LOG_LEVEL': 'logging.level',
        'LAMICONE_LOG_PATH': 'logging.path',
        'LAMICONE_WORKERS': 'task_queue.max_workers',
        'LAMICONE_TEMPLATE_DIR': 'svg.template_dir'
    }

    def __init__(self, config_path: Optional[str] = None, strict: bool = True):
        """初始化配置管理器

        Args:
            config_path: 配置文件路径，默认为环境变量 CONFIG_PATH 或 config/config.yaml
            strict: 为 False 时加载失败退回默认配置，错误保存在 load_error
        """
        self.config_path = config_path or os.getenv('CONFIG_PATH', 'config/config.yaml')
        self.strict = strict
        self.load_error: Optional[str] = None
        self.config: Dict[str, Any] = {}
        self.load_config()

    def load_config(self):
        """加载配置文件"""
        try:
            # 读取 .env（不覆盖已有环境变量）
            load_dotenv(override=False)

            self.config = self._get_default_config()

            # 配置文件不存在时只使用内置默认值
            if os.path.exists(self.config_path):
                with open(self.config_path, 'r', encoding='utf-8') as f:
                    loaded = yaml.safe_load(f) or {}
                if not isinstance(loaded, dict):
                    raise TypeError(f"配置文件 {self.config_path} 顶层必须是映射")
                self._merge(self.config, loaded)
            else:
                logger.debug(f"配置文件不存在，使用默认配置: {self.config_path}")

            # 使用环境变量覆盖配置
            self._override_from_env()

            # 验证配置
            self._validate_config()

            self.load_error = None
            logger.debug("配置加载完成")

        except Exception as e:
            logger.error(f"加载配置失败: {e}")
            if self.strict:
                raise
            self.load_error = str(e)
            self.config = self._get_default_config()

    def _get_default_config(self) -> Dict:
        """获取默认配置

        Returns:
            Dict: 默认配置字典
        """
        return {
            'analysis': {
                'horizon': 50,
                'tol': '1/1000000000',
                'trivial_tol': '1/100',
                'stage': 1
            },
            'realization': {
                'eps0': '1/10'
            },
            'svg': {
                'size': 512,
                'template_dir': 'templates'
            },
            'logging': {
                'path': '',
                'level': 'INFO',
                'max_size': 10485760,
                'backup_count': 5,
                'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            },
            'task_queue': {
                'max_workers': 4
            }
        }

    def _merge(self, base: Dict, override: Dict):
        """把 override 递归合并进 base"""
        for key, value in override.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                self._merge(base[key], value)
            else:
                base[key] = copy.deepcopy(value)

    def _override_from_env(self):
        """使用环境变量覆盖配置"""
        for env_var, config_path in self.ENV_MAPPING.items():
            value = os.getenv(env_var)
            if value is None:
                continue
            try:
                converted = self._convert_value(value, config_path)
            except ValueError as e:
                raise ConfigError(f"环境变量 {env_var}={value!r} 无法转换为 {config_path} 的类型") from e
            self.set(config_path, converted)

    def _convert_value(self, value: str, config_path: str) -> Any:
        """转换配置值类型

        Args:
            value: 配置值
            config_path: 配置路径

        Returns:
            Any: 转换后的配置值
        """
        if config_path not in self.VALIDATION_RULES:
            return value

        rule = self.VALIDATION_RULES[config_path]
        if rule['type'] == bool:
            return value.lower() in ('true', '1', 'yes', 'on')
        elif rule['type'] == int:
            return int(value)
        elif rule['type'] == list:
            return value.split(',')
        return value

    def _validate_config(self):
        """验证配置项"""
        for path, rule in self.VALIDATION_RULES.items():
            value = self.get(path)

            # 检查必需项
            if rule.get('required', False) and value in (None, ''):
                raise ValueError(f"配置项 {path} 为必填项")

            # 如果值为空且非必需，跳过后续验证
            if value in (None, '') and not rule.get('required', False):
                continue

            # 类型检查（bool 是 int 的子类，需单独排除）
            if not isinstance(value, rule['type']) or (rule['type'] == int and isinstance(value, bool)):
                raise TypeError(f"配置项 {path} 类型必须为 {rule['type'].__name__}")

            # 数值范围检查
            if isinstance(value, int):
                if 'min' in rule and value < rule['min']:
                    raise ValueError(f"配置项 {path} 不能小于 {rule['min']}")
                if 'max' in rule and value > rule['max']:
                    raise ValueError(f"配置项 {path} 不能大于 {rule['max']}")

            # 枚举值检查
            if 'enum' in rule and value not in rule['enum']:
                raise ValueError(f"配置项 {path} 必须是以下值之一: {', '.join(rule['enum'])}")

            # 正有理数检查
            if rule.get('rational'):
                try:
                    parsed = Fraction(value)
                except (ValueError, ZeroDivisionError):
                    raise ValueError(f"配置项 {path} 必须是有理数字符串，如 1/100: {value}")
                if parsed <= 0:
                    raise ValueError(f"配置项 {path} 必须为正数")

    def get(self, path: str, default: Any = None) -> Any:
        """获取配置项

        Args:
            path: 配置路径，使用点号分隔，如 'analysis.horizon'
            default: 默认值

        Returns:
            Any: 配置值
        """
        try:
            value = self.config
            for key in path.split('.'):
                value = value[key]
            return value
        except (KeyError, TypeError):
            return default

    def get_rational(self, path: str) -> Fraction:
        """以精确有理数读取配置项"""
        return Fraction(str(self.get(path)))

    def set(self, path: str, value: Any):
        """设置配置项

        Args:
            path: 配置路径，使用点号分隔，如 'analysis.horizon'
            value: 配置值
        """
        keys = path.split('.')
        current = self.config

        for key in keys[:-1]:
            if key not in current:
                current[key] = {}
            current = current[key]

        current[keys[-1]] = value

    def save(self):
        """保存配置到文件"""
        try:
            directory = os.path.dirname(self.config_path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(self.config_path, 'w', encoding='utf-8') as f:
                yaml.safe_dump(self.config, f, allow_unicode=True)
            logger.info(f"配置保存完成: {self.config_path}")
        except Exception as e:
            logger.error(f"保存配置失败: {e}")
            raise

    def reload(self):
        """重新加载配置"""
        self.load_config()
        logger.debug("配置重新加载完成")


# 创建全局配置管理器实例
config_manager = ConfigManager(strict=False)
