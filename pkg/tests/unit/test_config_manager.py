"""
配置管理器单元测试
"""

import os
from fractions import Fraction
from pathlib import Path

import pytest
import yaml

from src.core.config_manager import ConfigError, ConfigManager


def test_config_manager_init(test_env):
    """测试配置管理器初始化"""
    config_path = test_env['config_path']
    manager = ConfigManager(str(config_path))

    assert manager.config_path == str(config_path)
    assert isinstance(manager.config, dict)


def test_missing_file_uses_defaults(temp_dir):
    """测试配置文件缺失时使用默认值且不写文件"""
    config_path = Path(temp_dir) / 'absent' / 'config.yaml'
    manager = ConfigManager(str(config_path))

    assert not config_path.exists()
    assert manager.get('analysis.horizon') == 50
    assert manager.get('analysis.tol') == '1/1000000000'
    assert manager.get('svg.size') == 512
    assert manager.get('task_queue.max_workers') == 4


def test_load_config(test_env):
    """测试加载配置"""
    config_path = test_env['config_path']
    test_config = test_env['test_config']

    with open(config_path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(test_config, f)

    manager = ConfigManager(str(config_path))
    assert manager.get('analysis.horizon') == 30
    assert manager.get('realization.eps0') == '1/20'
    # 文件未给出的键保留默认值
    assert manager.get('logging.format')


def test_override_from_env(test_env):
    """测试环境变量覆盖配置"""
    config_path = test_env['config_path']

    os.environ['LAMICONE_HORIZON'] = '77'
    os.environ['LAMICONE_TOL'] = '1/5000'
    os.environ['LAMICONE_WORKERS'] = '3'

    manager = ConfigManager(str(config_path))

    assert manager.get('analysis.horizon') == 77
    assert manager.get('analysis.tol') == '1/5000'
    assert manager.get('task_queue.max_workers') == 3


def test_get_rational(test_env):
    """测试按精确有理数读取配置"""
    manager = ConfigManager(str(test_env['config_path']))
    assert manager.get_rational('analysis.trivial_tol') == Fraction(1, 50)
    assert manager.get_rational('realization.eps0') == Fraction(1, 20)


def test_bad_env_value_is_config_error(test_env):
    """测试环境变量无法转换时报告为配置错误"""
    os.environ['LAMICONE_HORIZON'] = 'abc'

    with pytest.raises(ConfigError, match='LAMICONE_HORIZON'):
        ConfigManager(str(test_env['config_path']))


def test_non_strict_falls_back_to_defaults(test_env):
    """测试非严格模式下加载失败退回默认配置并保留错误"""
    os.environ['LAMICONE_WORKERS'] = 'many'
    manager = ConfigManager(str(test_env['config_path']), strict=False)

    assert 'LAMICONE_WORKERS' in manager.load_error
    assert manager.get('task_queue.max_workers') == 4

    os.environ.pop('LAMICONE_WORKERS')
    manager.reload()
    assert manager.load_error is None
    assert manager.get('task_queue.max_workers') == 2


@pytest.mark.parametrize('key,value', [
    ('analysis.horizon', 1),
    ('analysis.tol', '0'),
    ('analysis.tol', 'abc'),
    ('logging.level', 'LOUD'),
    ('task_queue.max_workers', 0),
])
def test_invalid_values_rejected(test_env, key, value):
    """测试非法配置值被拒绝"""
    config_path = test_env['config_path']
    section, name = key.split('.')
    with open(config_path, 'w', encoding='utf-8') as f:
        yaml.safe_dump({section: {name: value}}, f)

    with pytest.raises((ValueError, TypeError)):
        ConfigManager(str(config_path))


def test_bool_is_not_int(test_env):
    """测试布尔值不被当作整数"""
    config_path = test_env['config_path']
    with open(config_path, 'w', encoding='utf-8') as f:
        yaml.safe_dump({'analysis': {'horizon': True}}, f)

    with pytest.raises(TypeError):
        ConfigManager(str(config_path))


def test_get_config(test_env):
    """测试获取配置项"""
    manager = ConfigManager(str(test_env['config_path']))

    assert manager.get('not.exist') is None
    assert manager.get('not.exist', 'default') == 'default'


def test_set_and_save_config(test_env):
    """测试设置并保存配置项"""
    config_path = test_env['config_path']
    manager = ConfigManager(str(config_path))

    manager.set('analysis.horizon', 120)
    manager.save()

    assert manager.get('analysis.horizon') == 120
    with open(config_path, 'r', encoding='utf-8') as f:
        config = yaml.safe_load(f)
    assert config['analysis']['horizon'] == 120


def test_reload_config(test_env):
    """测试重新加载配置"""
    config_path = test_env['config_path']
    test_config = test_env['test_config']

    with open(config_path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(test_config, f)

    manager = ConfigManager(str(config_path))
    assert manager.get('analysis.horizon') == 30

    test_config['analysis']['horizon'] = 90
    with open(config_path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(test_config, f)

    manager.reload()
    assert manager.get('analysis.horizon') == 90
