"""
逆系统核心单元测试
"""

from fractions import Fraction

import pytest

from src.core.cone_core import (
    HorizonError,
    InverseConeSystem,
    SystemFileError,
    SystemValidationError,
    Thread,
    ThreadDataError,
    apply,
    check_thread,
    system_from_dims,
    validate_system,
)
from src.core.generators import builtin_rule
from src.core.matrix import MatrixError, TransitionMatrix


def test_validate_finite_system():
    """测试有限系统校验"""
    system = validate_system({
        'dims': [2, 2, 1],
        'matrices': [[['1/2', '1/3'], ['1/2', '2/3']], [[1], [1]]],
        'generator': None,
    })

    assert system.is_finite
    assert system.last_stage == 3
    assert system.dims(3) == [2, 2, 1]
    assert system.compose(1, 3).to_strings() == [['5/6'], ['7/6']]


def test_validate_generator_system():
    """测试带生成规则的系统"""
    system = validate_system({'matrices': [], 'generator': {'kind': 'builtin', 'name': 'example-4.5'}})

    assert not system.is_finite
    assert system.compose(1, 3).to_ints() == [[2, 1], [1, 1]]
    assert system.compose(2, 2) == TransitionMatrix.identity(2)


def test_prefix_joins_generator():
    """测试显式前缀与生成规则的衔接"""
    system = validate_system({
        'matrices': [[[1, 1]]],
        'generator': {'kind': 'builtin', 'name': 'example-4.5'},
    })
    assert system.transition(2).to_ints() == [[1, 0], [1, 1]]

    with pytest.raises(SystemValidationError):
        validate_system({'matrices': [[[1, 1, 1]]], 'generator': {'kind': 'builtin', 'name': 'example-4.5'}})


@pytest.mark.parametrize('data,error', [
    ([], SystemFileError),
    ({'matrices': [], 'extra': 1}, SystemFileError),
    ({'matrices': [[[1, 'x']]]}, SystemFileError),
    ({'matrices': [[1, 2]]}, SystemFileError),
    ({'matrices': [[[1, -1]]]}, SystemValidationError),
    ({'matrices': []}, SystemValidationError),
    ({'matrices': [[[1, 1]], [[1], [1], [1]]]}, SystemValidationError),
    ({'dims': [1, 3], 'matrices': [[[1, 1]]]}, SystemValidationError),
    ({'dims': [1, 2, 2], 'matrices': [[[1, 1]]]}, SystemValidationError),
    ({'dims': [1, 0], 'matrices': [[[1]]]}, SystemValidationError),
    ({'dims': ['1', 2], 'matrices': [[[1, 1]]]}, SystemFileError),
    ({'matrices': [], 'generator': {'kind': 'spiral'}}, SystemFileError),
    ({'generator': {'kind': 'periodic', 'matrices': [[1, 2]]}}, SystemFileError),
    ({'generator': {'kind': 'builtin', 'name': ['x']}}, SystemFileError),
    ({'generator': {'kind': 'triangular-shift', 'diagonal': 'x'}}, SystemFileError),
    ({'matrices': 7}, SystemFileError),
    ({'matrices': [[[0.5, 1]]]}, SystemFileError),
    ({'matrices': [[[True, 1]]]}, SystemFileError),
    ({'matrices': [[[]]]}, SystemFileError),
    ({'dims': 3, 'matrices': [[[1]]]}, SystemFileError),
])
def test_validate_rejects(data, error):
    """测试非法系统描述"""
    with pytest.raises(error):
        validate_system(data)


def test_mismatch_reports_stage():
    """测试维数不衔接时报告阶段"""
    with pytest.raises(SystemValidationError) as info:
        validate_system({'matrices': [[[1]], [[1, 1]], [[1]]]})
    assert info.value.stage == 2


def test_generator_dims_checked():
    """测试生成阶段的维数也按 dims 校验"""
    with pytest.raises(SystemValidationError):
        validate_system({'dims': [1, 2, 4], 'matrices': [], 'generator': {'kind': 'builtin', 'name': 'example-4.3'}})
    system = validate_system({'dims': [1, 2, 3], 'matrices': [],
                              'generator': {'kind': 'builtin', 'name': 'example-4.3'}})
    assert system.dim(3) == 3


def test_compose_ordinal_family():
    """测试复合映射"""
    system = InverseConeSystem(rule=builtin_rule('example-4.3'))

    assert system.compose(1, 3).to_ints() == [[1, 1, 1]]
    assert system.compose(2, 4).to_ints() == [[1, 0, 0, 0], [0, 1, 1, 1]]


def test_compose_bounds():
    """测试复合下标越界"""
    system = system_from_dims([1, 2], [[[1, 1]]])

    with pytest.raises(HorizonError):
        system.compose(1, 3)
    with pytest.raises(HorizonError):
        system.compose(2, 1)
    with pytest.raises(HorizonError):
        system.transition(2)
    assert system.effective_horizon(10) == 2


def test_apply():
    """测试矩阵作用于非负向量"""
    matrix = TransitionMatrix([[3, 2, 0], [0, 1, 0]])

    assert apply(matrix, [1, 1, 1]) == (5, 1)
    with pytest.raises(MatrixError):
        apply(matrix, [1, -1, 0])


def test_thread_consistent():
    """测试一致的线程"""
    system = InverseConeSystem(rule=builtin_rule('example-4.5'))
    thread = Thread.of([[2, 1], [1, 1], [1, 0]])

    report = check_thread(system, thread)
    assert report.consistent
    assert report.checked_stages == 3
    assert report.to_dict() == {'consistent': True, 'checked_stages': 3}


def test_thread_inconsistent_at_stage_one():
    """测试在第 1 级失败的线程"""
    system = InverseConeSystem(rule=builtin_rule('example-4.3'))
    thread = Thread.of([[2], [1, 0]])

    report = check_thread(system, thread)
    assert not report.consistent
    assert report.failing_stage == 1
    assert report.actual == (Fraction(1),)
    assert report.to_dict()['expected'] == ['2']


def test_thread_data_errors():
    """测试线程维数或符号错误"""
    system = InverseConeSystem(rule=builtin_rule('example-4.3'))

    with pytest.raises(ThreadDataError):
        check_thread(system, Thread.of([[1, 1]]))
    with pytest.raises(ThreadDataError):
        check_thread(system, Thread.of([[-1]]))


def test_random_ordinal_threads(rng):
    """测试随机 ell1 线程在序数族上一致"""
    system = InverseConeSystem(rule=builtin_rule('example-4.3'))

    for _ in range(200):
        depth = rng.randint(2, 12)
        weights = [Fraction(rng.randint(0, 9), rng.randint(1, 6)) for _ in range(depth + 1)]
        # 第 n 级: 前 n-1 个权重原样保留，最后一个坐标为余下权重之和
        stages = [weights[:n - 1] + [sum(weights[n - 1:], Fraction(0))] for n in range(1, depth + 1)]
        assert check_thread(system, Thread.of(stages)).consistent


def test_describe():
    """测试系统描述"""
    system = InverseConeSystem(rule=builtin_rule('zero-measure-8.1'), name='zero-measure-8.1')

    info = system.describe()
    assert info['name'] == 'zero-measure-8.1'
    assert info['explicit_stages'] == 0
    assert info['generator']['kind'] == 'triangular-shift'


def test_compose_associative(rng):
    """测试 pi_nk = pi_nm pi_mk"""
    systems = [InverseConeSystem(rule=builtin_rule(name))
               for name in ('example-4.3', 'example-4.4', 'example-4.5', 'zero-measure-8.1', 'nobase-8.2')]
    for _ in range(150):
        system = rng.choice(systems)
        n = rng.randint(1, 6)
        m = rng.randint(n, 9)
        k = rng.randint(m, 12)
        assert system.compose(n, k) == system.compose(n, m) @ system.compose(m, k)


def test_apply_is_linear(rng):
    """测试 apply(M, a u + b v) = a apply(M, u) + b apply(M, v)"""
    for _ in range(200):
        rows, cols = rng.randint(1, 5), rng.randint(1, 5)
        matrix = TransitionMatrix([[Fraction(rng.randint(0, 9), rng.randint(1, 5)) for _ in range(cols)]
                                   for _ in range(rows)])
        u = [Fraction(rng.randint(0, 9), rng.randint(1, 4)) for _ in range(cols)]
        v = [Fraction(rng.randint(0, 9), rng.randint(1, 4)) for _ in range(cols)]
        a, b = Fraction(rng.randint(0, 5), rng.randint(1, 3)), Fraction(rng.randint(0, 5), rng.randint(1, 3))

        combined = apply(matrix, [a * x + b * y for x, y in zip(u, v)])
        assert combined == tuple(a * x + b * y for x, y in zip(apply(matrix, u), apply(matrix, v)))
        assert apply(matrix, [0] * cols) == (0,) * rows
