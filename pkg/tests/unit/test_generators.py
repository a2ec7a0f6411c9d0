"""
阶段生成规则单元测试
"""

from fractions import Fraction

import pytest

from src.core.cone_core import InverseConeSystem, Thread, ThreadDataError, check_thread
from src.core.generators import (
    BUILTIN_RULES,
    GeneratorError,
    PeriodicRule,
    TriangularShiftRule,
    builtin_rule,
    rule_from_config,
)


def test_builtin_families():
    """测试内置族的前几级矩阵"""
    assert builtin_rule('example-4.3').matrix(1).to_ints() == [[1, 1]]
    assert builtin_rule('example-4.3').matrix(2).to_ints() == [[1, 0, 0], [0, 1, 1]]
    assert builtin_rule('example-4.4').matrix(1).to_ints() == [[1, 0, 1], [0, 1, 1]]
    assert builtin_rule('nobase-4.6').matrix(2).to_ints() == [[1, 0, 0], [0, 1, 0]]
    assert builtin_rule('nobase-8.2').matrix(1).to_ints() == [[1, 0, 0, 1], [0, 0, 1, 0]]


def test_dims_follow_stage():
    """测试各内置族的维数增长"""
    assert [builtin_rule('example-4.3').dim(n) for n in range(1, 5)] == [1, 2, 3, 4]
    assert [builtin_rule('example-4.4').dim(n) for n in range(1, 5)] == [2, 3, 4, 5]
    assert [builtin_rule('nobase-8.2').dim(n) for n in range(1, 4)] == [2, 4, 6]


def test_periodic_rule():
    """测试周期规则循环取矩阵"""
    rule = builtin_rule('example-4.5')

    assert rule.matrix(1).to_ints() == [[1, 1], [0, 1]]
    assert rule.matrix(2).to_ints() == [[1, 0], [1, 1]]
    assert rule.matrix(7) is rule.matrix(1)


def test_periodic_rule_rejects_broken_chain():
    """测试周期规则首尾维数不衔接时报错"""
    with pytest.raises(GeneratorError):
        PeriodicRule([[[1, 1]], [[1], [1]], [[1, 1]]])
    with pytest.raises(GeneratorError):
        PeriodicRule([])


def test_triangular_shift():
    """测试下三角平移族"""
    rule = TriangularShiftRule(1, 2)

    assert rule.matrix(1).to_ints() == [[1, 0]]
    assert rule.matrix(3).to_ints() == [[1, 0, 0, 0], [2, 1, 0, 0], [2, 2, 1, 0]]
    assert rule.square_block(2).to_ints() == [[1, 0], [2, 1]]

    custom = TriangularShiftRule('1/2', 3)
    assert custom.matrix(2).to_strings() == [['1/2', '0', '0'], ['3', '1/2', '0']]
    with pytest.raises(GeneratorError):
        TriangularShiftRule(-1, 2)


def test_stage_index_must_be_positive():
    """测试阶段下标从 1 开始"""
    with pytest.raises(GeneratorError):
        TriangularShiftRule().matrix(0)


def test_unknown_builtin():
    """测试未知内置族"""
    with pytest.raises(GeneratorError, match='zero-measure-8.1'):
        builtin_rule('no-such-family')
    assert 'zero-measure-8.1' in BUILTIN_RULES


def test_rule_from_config():
    """测试从 JSON 描述构造规则"""
    periodic = rule_from_config({'kind': 'periodic', 'matrices': [[['1/2', 1], [1, 0]]]})
    assert periodic.matrix(3).to_strings() == [['1/2', '1'], ['1', '0']]

    builtin = rule_from_config({'kind': 'builtin', 'name': 'example-4.5'})
    assert builtin.describe() == {'kind': 'periodic', 'period': 2}

    triangular = rule_from_config({'kind': 'triangular-shift', 'diagonal': '1', 'subdiagonal': '2'})
    assert triangular.describe()['subdiagonal'] == '2'


@pytest.mark.parametrize('data', [
    [],
    {'kind': 'spiral'},
    {'kind': 'periodic', 'matrices': [[[1]]], 'period': 2},
    {'kind': 'builtin'},
    {'kind': 'periodic', 'matrices': [[[1, -1]]]},
    {'kind': 'periodic', 'matrices': [[1, 2]]},
    {'kind': 'periodic', 'matrices': 7},
    {'kind': 'builtin', 'name': ['x']},
    {'kind': 'builtin', 'name': 'example-4.5', 'diagonal': 1},
    {'kind': 'triangular-shift', 'diagonal': 0.5},
    {'kind': 'triangular-shift', 'subdiagonal': '1/0'},
])
def test_rule_from_config_rejects(data):
    """测试非法生成规则描述"""
    with pytest.raises(GeneratorError):
        rule_from_config(data)


@pytest.mark.parametrize('name', sorted(BUILTIN_RULES))
def test_generator_deterministic(name):
    """测试同一阶段两次生成的矩阵完全相同"""
    first, second = builtin_rule(name), builtin_rule(name)
    for n in range(1, 16):
        assert first.matrix(n) == second.matrix(n)
        assert first.matrix(n) is first.matrix(n)


def test_config_rule_deterministic():
    """测试同一描述构造的规则给出相同矩阵"""
    data = {'kind': 'triangular-shift', 'diagonal': '1/3', 'subdiagonal': 2}
    first, second = rule_from_config(data), rule_from_config(data)
    assert all(first.matrix(n) == second.matrix(n) for n in range(1, 12))


def _closed_curve_thread(x, y, stages):
    # 第 n 级真叶坐标为 x_j 扣除前 n 条闭曲线的权重
    vectors = []
    for n in range(1, stages + 1):
        seen = sum(y[:n], Fraction(0))
        vectors.append([x[j] - seen for j in range(n)] + list(y[:n]))
    return Thread.of(vectors)


def test_closed_curve_thread():
    """测试真叶权重不小于闭曲线总权重时得到一致线程"""
    system = InverseConeSystem(rule=builtin_rule('nobase-8.2'))
    y = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)]
    x = [Fraction(1), Fraction(3, 2), Fraction(5), Fraction(1)]

    report = check_thread(system, _closed_curve_thread(x, y, 4))
    assert report.consistent
    assert report.checked_stages == 4


def test_closed_curve_thread_needs_total_weight():
    """测试某条真叶权重小于闭曲线总权重时没有非负线程"""
    system = InverseConeSystem(rule=builtin_rule('nobase-8.2'))
    y = [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)]
    x = [Fraction(3, 4), Fraction(2), Fraction(2), Fraction(2)]

    with pytest.raises(ThreadDataError, match='负分量'):
        check_thread(system, _closed_curve_thread(x, y, 4))
