"""
Pytest 配置文件

提供测试环境设置和通用 fixtures
"""

import json
import logging
import os
import random
from pathlib import Path

import pytest
import yaml


ENV_KEYS = ['CONFIG_PATH', 'LAMICONE_HORIZON', 'LAMICONE_TOL', 'LAMICONE_LOG_LEVEL',
            'LAMICONE_LOG_PATH', 'LAMICONE_WORKERS', 'LAMICONE_TEMPLATE_DIR']


@pytest.fixture(scope="function")
def temp_dir(tmp_path):
    """每个测试独立的临时目录，配置文件与日志不会跨测试残留"""
    return str(tmp_path)


@pytest.fixture(scope="function")
def config_file(temp_dir):
    """创建测试配置文件"""
    config_dir = Path(temp_dir) / 'config'
    config_dir.mkdir(exist_ok=True)
    config_file = config_dir / 'config.yaml'

    # 创建测试配置
    test_config = {
        'analysis': {
            'horizon': 30,
            'tol': '1/1000',
            'trivial_tol': '1/50',
            'stage': 1
        },
        'realization': {
            'eps0': '1/20'
        },
        'svg': {
            'size': 256,
            'template_dir': 'templates'
        },
        'logging': {
            'path': str(Path(temp_dir) / 'data/logs'),
            'level': 'DEBUG',
            'max_size': '1MB',
            'backup_count': 2
        },
        'task_queue': {
            'max_workers': 2
        }
    }

    with open(config_file, 'w', encoding='utf-8') as f:
        yaml.safe_dump(test_config, f)

    yield config_file, test_config


@pytest.fixture(scope="function")
def test_env(temp_dir, config_file):
    """设置测试环境"""
    config_path, test_config = config_file

    data_dir = Path(temp_dir) / 'data'
    log_dir = data_dir / 'logs'
    output_dir = data_dir / 'output'
    for directory in [log_dir, output_dir]:
        directory.mkdir(parents=True, exist_ok=True)

    os.environ['CONFIG_PATH'] = str(config_path)

    yield {
        'temp_dir': temp_dir,
        'config_path': config_path,
        'test_config': test_config,
        'data_dir': data_dir,
        'log_dir': log_dir,
        'output_dir': output_dir
    }

    # 清理环境变量
    for key in ENV_KEYS:
        os.environ.pop(key, None)


@pytest.fixture
def rng():
    """固定种子的随机数生成器"""
    return random.Random(20240517)


@pytest.fixture
def write_json(tmp_path):
    """把对象写成 JSON 文件并返回路径"""
    def _write(name, data):
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data), encoding='utf-8')
        return str(path)
    return _write


FIG10_MATRIX = [[1, 1, 3, 1], [3, 1, 3, 1], [1, 3, 1, 1]]
CONSTANT_STAGE = [['1/2', '1/3'], ['1/2', '2/3']]


@pytest.fixture
def fig10_matrix():
    return [row[:] for row in FIG10_MATRIX]


@pytest.fixture
def constant_stage():
    return [row[:] for row in CONSTANT_STAGE]


@pytest.fixture(autouse=True)
def restore_root_logger():
    """LogManager 会重建根日志器的处理器，测试结束后恢复"""
    root_logger = logging.getLogger()
    handlers, level = root_logger.handlers[:], root_logger.level
    yield
    for handler in root_logger.handlers[:]:
        if handler not in handlers:
            root_logger.removeHandler(handler)
            handler.close()
    for handler in handlers:
        if handler not in root_logger.handlers:
            root_logger.addHandler(handler)
    root_logger.setLevel(level)
