"""
奇数逼近与流水线单元测试
"""

from fractions import Fraction

import pytest

from src.core.limit_analysis import CertificateKind, minimality_certificate
from src.core.realization import (
    PipelineError,
    StochasticMatrix,
    StochasticMatrixError,
    default_schedule,
    nearest_odd_positive,
    odd_approximate,
    realize_pipeline,
    smallest_odd_above,
    sup_distance,
)
from src.core.stage_pool import StagePool


def _random_stochastic(rng, rows, cols):
    columns = []
    for _ in range(cols):
        weights = [rng.randint(0, 9) for _ in range(rows)]
        if not any(weights):
            weights[rng.randrange(rows)] = 1
        total = sum(weights)
        columns.append([Fraction(w, total) for w in weights])
    return [[columns[j][i] for j in range(cols)] for i in range(rows)]


def test_stochastic_matrix_validation():
    """测试列随机矩阵校验"""
    matrix = StochasticMatrix([['1/2', '1/3'], ['1/2', '2/3']])
    assert matrix.shape == (2, 2)
    assert matrix.is_surjective()

    with pytest.raises(StochasticMatrixError, match='第 2 列'):
        StochasticMatrix([[1, '1/2'], [0, '1/4']])
    with pytest.raises(StochasticMatrixError):
        StochasticMatrix([[1, 2], [3]])


def test_odd_helpers():
    """测试最近正奇数与严格上界奇数"""
    assert nearest_odd_positive(Fraction(22, 3)) == 7
    assert nearest_odd_positive(Fraction(17, 2)) == 9
    assert nearest_odd_positive(Fraction(1, 5)) == 1
    assert smallest_odd_above(Fraction(10)) == 11
    assert smallest_odd_above(Fraction(2)) == 3
    assert smallest_odd_above(Fraction(21, 2)) == 11


def test_worked_example():
    """测试 2x2 列随机矩阵在 eps=1/10 下的奇数逼近"""
    result = odd_approximate([['1/2', '1/3'], ['1/2', '2/3']], '1/10')

    assert result.K == 11
    assert result.scale == 22
    assert result.integer_matrix.to_ints() == [[11, 7], [11, 15]]
    assert result.max_error == Fraction(1, 66)


def test_single_row_passthrough():
    """测试 p=1 时原样返回"""
    result = odd_approximate([[1, 1, 1]], '1/100')

    assert result.K == 1
    assert result.approximation == result.source
    assert result.max_error == 0


@pytest.mark.parametrize('eps', ['0', '-1/2'])
def test_eps_must_be_positive(eps):
    """测试 eps 非正时报错"""
    with pytest.raises(ValueError, match='epsilon must be positive'):
        odd_approximate([['1/2'], ['1/2']], eps)


def test_random_odd_approximations(rng):
    """测试随机列随机矩阵的奇数逼近满足全部约束"""
    for _ in range(1000):
        rows, cols = rng.randint(2, 6), rng.randint(1, 6)
        eps = rng.choice([Fraction(1, 5), Fraction(1, 20)])
        source = StochasticMatrix(_random_stochastic(rng, rows, cols))
        result = odd_approximate(source, eps)

        assert result.K % 2 == 1 and result.K > max(rows, 1 / eps)
        integers = result.integer_matrix
        assert integers.is_integer()
        assert all(x > 0 and x % 2 == 1 for row in integers.to_ints() for x in row)
        assert all(s == result.scale for s in integers.column_sums())
        assert sup_distance(source, result.approximation) == result.max_error < eps


def test_odd_approximate_deterministic(rng):
    """测试同一输入总是得到同一逼近"""
    for _ in range(100):
        entries = _random_stochastic(rng, rng.randint(2, 5), rng.randint(1, 5))
        eps = rng.choice([Fraction(1, 5), Fraction(1, 20)])
        first = odd_approximate(entries, eps)
        second = odd_approximate(StochasticMatrix([row[:] for row in entries]), eps)

        assert first == second
        assert first.integer_matrix == second.integer_matrix


def test_sup_distance_example():
    """测试顶点处的 l-infinity 距离"""
    identity = StochasticMatrix([[1, 0], [0, 1]])
    shifted = StochasticMatrix([['9/10', 0], ['1/10', 1]])

    assert sup_distance(identity, shifted) == Fraction(1, 10)
    assert sup_distance(identity, identity) == 0
    with pytest.raises(StochasticMatrixError):
        sup_distance(identity, StochasticMatrix([[1], [0]]))


def test_sup_distance_is_a_metric(rng):
    """测试对称性与三角不等式"""
    for _ in range(300):
        rows, cols = rng.randint(1, 5), rng.randint(1, 5)
        f, g, h = (StochasticMatrix(_random_stochastic(rng, rows, cols)) for _ in range(3))

        assert sup_distance(f, g) == sup_distance(g, f)
        assert sup_distance(f, h) <= sup_distance(f, g) + sup_distance(g, h)


def test_default_schedule():
    """测试几何误差序列"""
    assert default_schedule(3) == [Fraction(1, 20), Fraction(1, 40), Fraction(1, 80)]
    assert default_schedule(2, '1/100') == [Fraction(1, 200), Fraction(1, 400)]
    with pytest.raises(ValueError):
        default_schedule(2, 0)


def test_random_pipeline(rng):
    """测试 5 阶段随机流水线"""
    dims = [rng.randint(2, 4) for _ in range(6)]
    stages = [_random_stochastic(rng, dims[n], dims[n + 1]) for n in range(5)]
    schedule = [Fraction(1, 100 * 2 ** n) for n in range(1, 6)]

    with StagePool(max_workers=2) as pool:
        output = realize_pipeline(stages, schedule, pool=pool)

    system = output.to_system()
    total = 1
    for n in range(1, 6):
        total *= output.scales[n - 1]
        assert set(system.compose(1, n + 1).column_sums()) == {total}
        assert output.distances[n - 1] < schedule[n - 1]
        certificate = minimality_certificate(system, n, system.last_stage)
        assert certificate.kind == CertificateKind.MINIMAL
        assert certificate.witness['m0'] == n + 1
    assert output.base_scales[-1] == Fraction(1, total)
    assert sum(output.normalized_composite(6).matrix.column_sums()) == dims[5]


def test_constant_pipeline_column_sums(constant_stage):
    """测试常数阶段系统的列和为 22^(n-1)"""
    output = realize_pipeline([constant_stage] * 4, ['1/10'] * 4)
    system = output.to_system()

    assert output.scales == [22, 22, 22, 22]
    for n in range(2, 6):
        assert set(system.compose(1, n).column_sums()) == {22 ** (n - 1)}


def test_surjectivity_warning():
    """测试非满射阶段只记录告警"""
    output = realize_pipeline([[[1, 1], [0, 0]]], ['1/10'])

    assert output.surjectivity_warnings == [1]
    assert output.matrices[0].to_ints() == [[21, 21], [1, 1]]


def test_pipeline_errors(constant_stage):
    """测试流水线输入错误"""
    with pytest.raises(PipelineError):
        realize_pipeline([])
    with pytest.raises(PipelineError):
        realize_pipeline([constant_stage, [[1, 1, 1]]])
    with pytest.raises(PipelineError):
        realize_pipeline([constant_stage, constant_stage], ['1/10'])
    with pytest.raises(ValueError):
        realize_pipeline([constant_stage], ['0'])
