"""
实现模块

负责把单纯形逆系统变为奇数矩阵锥系统，包括:
1. 列随机矩阵的奇数逼近
2. 仿射映射的顶点上确界距离
3. 逐阶段流水线与列和不变量校验
"""

import math
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, List, Optional, Sequence

from .cone_core import InverseConeSystem
from .matrix import MatrixError, TransitionMatrix, as_matrix, format_rational, parse_rational
from .stage_pool import StagePool

logger = logging.getLogger(__name__)


class StochasticMatrixError(ValueError):
    """矩阵不是列随机矩阵"""


class PipelineError(ValueError):
    """流水线输入非法"""


class PipelineInvariantError(ArithmeticError):
    """流水线输出违反内部不变量"""


class StochasticMatrix:
    """列随机矩阵：非负且每列和恰为 1"""

    def __init__(self, entries: Any):
        try:
            self.matrix = as_matrix(entries)
        except MatrixError as e:
            raise StochasticMatrixError(str(e))
        for j, total in enumerate(self.matrix.column_sums(), start=1):
            if total != 1:
                raise StochasticMatrixError(f"第 {j} 列和为 {format_rational(total)}，不是 1")

    @property
    def p(self) -> int:
        return self.matrix.rows

    @property
    def q(self) -> int:
        return self.matrix.cols

    @property
    def shape(self):
        return self.matrix.shape

    def is_surjective(self) -> bool:
        # 列秩等于行数时仿射映射是满射
        return self.matrix.rank() == self.p

    def __eq__(self, other: object) -> bool:
        if isinstance(other, StochasticMatrix):
            return self.matrix == other.matrix
        return NotImplemented

    def __repr__(self) -> str:
        return f"StochasticMatrix({self.matrix.to_strings()})"


@dataclass(frozen=True)
class OddApproximation:
    """奇数逼近结果：(pK) * M' 逐项为正奇数"""

    source: StochasticMatrix
    approximation: StochasticMatrix
    K: int
    max_error: Fraction

    @property
    def scale(self) -> int:
        return self.source.p * self.K

    @property
    def integer_matrix(self) -> TransitionMatrix:
        return self.approximation.matrix.scale(self.scale)


def nearest_odd_positive(value: Fraction) -> int:
    """最近的正奇数；与两个奇数等距（偶数点）时取较大者，下限为 1"""
    floor = math.floor(value)
    if floor < 1:
        return 1
    return floor if floor % 2 else floor + 1


def smallest_odd_above(bound: Fraction) -> int:
    candidate = math.floor(bound) + 1
    return candidate if candidate % 2 else candidate + 1


def odd_approximate(matrix: Any, eps: Any) -> OddApproximation:
    """奇数逼近

    p=1 时原样返回且 K=1；否则 K 取大于 max(p, 1/eps) 的最小奇数，
    每列非最大项取 pK*m 的最近正奇数，最大项（首个达到列最大值的行）取 pK 减去其余之和。

    Args:
        matrix: 列随机矩阵
        eps: 正有理误差上界

    Returns:
        OddApproximation: 满足全部奇数性与误差约束的逼近
    """
    source = matrix if isinstance(matrix, StochasticMatrix) else StochasticMatrix(matrix)
    eps = parse_rational(eps)
    if eps <= 0:
        raise ValueError("epsilon 必须为正 (epsilon must be positive)")

    p, q = source.shape
    if p == 1:
        return OddApproximation(source, source, 1, Fraction(0))

    K = smallest_odd_above(max(Fraction(p), 1 / eps))
    scale = p * K
    columns = []
    for j in range(q):
        column = source.matrix.column(j)
        largest = column.index(max(column))
        adjusted = [nearest_odd_positive(scale * x) if i != largest else 0
                    for i, x in enumerate(column)]
        adjusted[largest] = scale - sum(adjusted)
        top = adjusted[largest]
        if top % 2 != 1 or top < K - p + 1:
            raise PipelineInvariantError(f"第 {j + 1} 列调整后的最大项 {top} 不是不小于 {K - p + 1} 的奇数")
        columns.append([Fraction(a, scale) for a in adjusted])

    approximation = StochasticMatrix(TransitionMatrix.from_columns(columns))
    error = sup_distance(source, approximation)
    if error >= eps:
        raise PipelineInvariantError(f"逼近误差 {format_rational(error)} 未小于 {format_rational(eps)}")
    return OddApproximation(source, approximation, K, error)


def sup_distance(first: StochasticMatrix, second: StochasticMatrix) -> Fraction:
    """顶点处的 l-infinity 距离；仿射映射在单纯形上的距离由顶点处取到上界"""
    if first.shape != second.shape:
        raise StochasticMatrixError(f"形状不一致: {first.shape} 与 {second.shape}")
    return max((abs(a - b)
                for row_a, row_b in zip(first.matrix.entries, second.matrix.entries)
                for a, b in zip(row_a, row_b)), default=Fraction(0))


def default_schedule(count: int, eps0: Any = Fraction(1, 10)) -> List[Fraction]:
    """几何误差序列 eps_n = eps0 * 2^-n"""
    eps0 = parse_rational(eps0)
    if eps0 <= 0:
        raise ValueError("eps0 必须为正")
    return [eps0 / 2 ** n for n in range(1, count + 1)]


@dataclass
class PipelineOutput:
    """流水线输出

    matrices[n-1] 为 A_n = (p_n K_n) M'_n；第 n 级基是 e_i * base_scales[n-1] 的凸包。
    """

    approximations: List[OddApproximation]
    schedule: List[Fraction]
    surjectivity_warnings: List[int] = field(default_factory=list)

    @property
    def matrices(self) -> List[TransitionMatrix]:
        return [a.integer_matrix for a in self.approximations]

    @property
    def scales(self) -> List[int]:
        return [a.scale for a in self.approximations]

    @property
    def odd_scales(self) -> List[int]:
        return [a.K for a in self.approximations]

    @property
    def distances(self) -> List[Fraction]:
        return [a.max_error for a in self.approximations]

    @property
    def base_scales(self) -> List[Fraction]:
        scales = [Fraction(1)]
        for scale in self.scales:
            scales.append(scales[-1] / scale)
        return scales

    def to_system(self) -> InverseConeSystem:
        return InverseConeSystem(self.matrices, name='odd-pipeline')

    def normalized(self, n: int) -> StochasticMatrix:
        """A_n / (p_n K_n)，即 g_n"""
        return self.approximations[n - 1].approximation

    def normalized_composite(self, n: int) -> StochasticMatrix:
        """g_1 g_2 ... g_{n-1}，列随机"""
        system = self.to_system()
        total = Fraction(1)
        for scale in self.scales[:n - 1]:
            total *= scale
        return StochasticMatrix(system.compose(1, n).scale(1 / total))


def _check_column_sums(output: PipelineOutput):
    system = output.to_system()
    expected = Fraction(1)
    for n in range(2, len(output.approximations) + 2):
        expected *= output.scales[n - 2]
        sums = system.compose(1, n).column_sums()
        if any(s != expected for s in sums):
            raise PipelineInvariantError(f"pi_1{n} 的列和不全等于 {expected}")


def realize_pipeline(stages: Sequence[Any], schedule: Optional[Sequence[Any]] = None,
                     pool: Optional[StagePool] = None) -> PipelineOutput:
    """对每个阶段做奇数逼近，得到奇数矩阵锥系统

    Args:
        stages: 列随机矩阵 f_n，f_n 为 dims[n] x dims[n+1]
        schedule: 误差序列 eps_n，默认 1/10 * 2^-n
        pool: 可选的阶段任务池

    Returns:
        PipelineOutput: 各阶段奇数矩阵、尺度与实际距离
    """
    if not stages:
        raise PipelineError("流水线至少需要一个阶段")
    matrices = [s if isinstance(s, StochasticMatrix) else StochasticMatrix(s) for s in stages]
    for n in range(1, len(matrices)):
        if matrices[n - 1].q != matrices[n].p:
            raise PipelineError(
                f"阶段 {n} 的列数 {matrices[n - 1].q} 与阶段 {n + 1} 的行数 {matrices[n].p} 不一致")

    eps_list = [parse_rational(e) for e in (schedule if schedule is not None else default_schedule(len(matrices)))]
    if len(eps_list) < len(matrices):
        raise PipelineError(f"误差序列长度 {len(eps_list)} 少于阶段数 {len(matrices)}")
    eps_list = eps_list[:len(matrices)]
    for n, eps in enumerate(eps_list, start=1):
        if eps <= 0:
            raise ValueError(f"阶段 {n} 的 epsilon 必须为正")

    warnings = [n for n, f in enumerate(matrices, start=1) if not f.is_surjective()]
    for n in warnings:
        logger.warning(f"阶段 {n} 的仿射映射不是满射（列秩小于行数），逼近仍会进行")

    jobs = list(zip(matrices, eps_list))
    if pool is None:
        with StagePool() as own_pool:
            approximations = own_pool.map(lambda job: odd_approximate(*job), jobs)
    else:
        approximations = pool.map(lambda job: odd_approximate(*job), jobs)

    output = PipelineOutput(approximations, eps_list, warnings)
    _check_column_sums(output)
    logger.info(f"流水线完成: {len(approximations)} 个阶段，尺度 {output.scales}")
    return output
