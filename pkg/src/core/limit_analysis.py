"""
极限分析模块

负责逆系统的有限阶段证书，包括:
1. 基存在判据（无零列）与拉回 Choquet 基
2. 顶点像的重心坐标
3. Hilbert 射影度量下的塌缩证书与区间包络
4. 平凡极限、多项式次数、有向性与极小性检查

所有判断都基于精确有理数；对数只用于展示。
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .cone_core import HorizonError, InverseConeSystem
from .matrix import Vector, parse_rational, parse_vector

logger = logging.getLogger(__name__)


class BaseCriterionError(ValueError):
    """某阶段之前存在零列，拉回基不存在"""


class GaugeError(ValueError):
    """射影规范只在严格正向量上有定义"""


class WindowTooShortError(ValueError):
    """差分窗口过短"""


class CertificateKind(str, Enum):
    BASE_EXISTS = 'base-exists'
    BASE_CRITERION_FAILS = 'base-criterion-fails'
    PROJECTIVE_COLLAPSE = 'projective-collapse'
    NO_COLLAPSE = 'no-collapse-within-horizon'
    TRIVIAL_LIMIT = 'trivial-limit'
    NOT_TRIVIAL = 'not-trivial-within-horizon'
    MINIMAL = 'minimal'
    NOT_MINIMAL = 'not-certified-within-horizon'
    DIRECTED = 'directed'
    NOT_DIRECTED = 'not-directed'


POSITIVE_KINDS = {
    CertificateKind.BASE_EXISTS,
    CertificateKind.PROJECTIVE_COLLAPSE,
    CertificateKind.TRIVIAL_LIMIT,
    CertificateKind.MINIMAL,
    CertificateKind.DIRECTED,
}


@dataclass
class Certificate:
    """有限阶段证书

    computation 与 parameters 记录产生该证书的计算，recheck 可据此复算。
    witness 中的标量保持为 Fraction，序列化时转为 "p/q"。
    """

    kind: CertificateKind
    horizon: int
    computation: str
    parameters: Dict[str, Any]
    witness: Dict[str, Any] = field(default_factory=dict)
    summary: str = ''

    @property
    def holds(self) -> bool:
        return self.kind in POSITIVE_KINDS


@dataclass(frozen=True)
class SimplexStage:
    """第 stage 级锥的基：顶点 e_j / s_j，切出基的线性泛函为 w -> sum s_j w_j"""

    stage: int
    vertices: Tuple[Vector, ...]
    functional: Vector

    def evaluate(self, point: Sequence) -> Fraction:
        return sum((s * x for s, x in zip(self.functional, parse_vector(point))), Fraction(0))


@dataclass(frozen=True)
class ProjectiveGauge:
    """点集的 Hilbert 射影直径，cross_ratio = exp(直径)"""

    cross_ratio: Fraction
    log_value: float

    @property
    def is_point(self) -> bool:
        return self.cross_ratio == 1


def base_exists(system: InverseConeSystem, horizon: int) -> Certificate:
    """检查 horizon 之前的每个阶段矩阵都没有零列

    对非负矩阵，存在非零非负核向量当且仅当有零列。

    Args:
        system: 逆系统
        horizon: 检查到第 horizon 级锥（至少为 2）

    Returns:
        Certificate: base-exists，或带第一个 (阶段, 列) 的 base-criterion-fails
    """
    if horizon < 2:
        raise HorizonError(f"horizon 必须 >= 2: {horizon}")
    effective = system.effective_horizon(horizon)
    params = {'horizon': horizon}
    for n in range(1, effective):
        zero_columns = system.transition(n).zero_columns()
        if zero_columns:
            column = zero_columns[0] + 1
            return Certificate(
                CertificateKind.BASE_CRITERION_FAILS, effective, 'base_exists', params,
                witness={'stage': n, 'column': column},
                summary=f"阶段 {n} 的第 {column} 列为零，拉回基不存在")
    return Certificate(
        CertificateKind.BASE_EXISTS, effective, 'base_exists', params,
        witness={'stages_checked': effective - 1},
        summary=f"阶段 1..{effective - 1} 均无零列")


def pullback_base(system: InverseConeSystem, n: int) -> SimplexStage:
    """B_1 取标准概率单纯形时，第 n 级的拉回基 B_n = pi_1n^{-1}(B_1)"""
    sums = system.compose(1, n).column_sums()
    for j, s in enumerate(sums, start=1):
        if s == 0:
            raise BaseCriterionError(f"pi_1{n} 的第 {j} 列和为零，阶段 {n} 之前基判据失败")
    size = len(sums)
    vertices = tuple(
        tuple(Fraction(1) / sums[j] if i == j else Fraction(0) for i in range(size))
        for j in range(size)
    )
    return SimplexStage(n, vertices, sums)


def vertex_images(system: InverseConeSystem, n: int, m: int) -> List[Vector]:
    """B_m 各顶点在 pi_nm 下的像，以 B_n 顶点的重心坐标表示

    顶点 e_j/s_j^(m) 的像是 pi_nm 第 j 列除以 s_j^(m)；
    B_n 顶点为 e_i/s_i^(n)，故第 i 个重心坐标为 (pi_nm)_ij * s_i^(n) / s_j^(m)。
    """
    if m < n:
        raise HorizonError(f"vertex_images 要求 m >= n: n={n}, m={m}")
    source = pullback_base(system, n)
    target = pullback_base(system, m)
    composite = system.compose(n, m)
    images = []
    for j in range(composite.cols):
        column = composite.column(j)
        coords = tuple(column[i] * source.functional[i] / target.functional[j]
                       for i in range(composite.rows))
        if sum(coords) != 1:
            raise ArithmeticError(f"顶点 {j + 1} 的重心坐标和不为 1")
        images.append(coords)
    return images


def _log_display(value: Fraction) -> float:
    # 分子分母可能超出浮点范围，分开取对数
    return math.log(value.numerator) - math.log(value.denominator)


def projective_gauge(points: Sequence[Sequence]) -> ProjectiveGauge:
    """严格正向量集合的射影规范

    cross_ratio = max_{u,v} (max_i u_i/v_i) * (max_i v_i/u_i)

    Args:
        points: 等长的严格正向量

    Returns:
        ProjectiveGauge: 精确交比与展示用的对数值
    """
    vectors = [parse_vector(p) for p in points]
    if not vectors:
        raise GaugeError("射影规范至少需要一个向量")
    length = len(vectors[0])
    if length < 1 or any(len(v) != length for v in vectors):
        raise GaugeError("射影规范要求向量等长且非空")
    for index, vector in enumerate(vectors, start=1):
        if any(x <= 0 for x in vector):
            raise GaugeError(f"第 {index} 个向量含非正分量，射影规范无定义")

    # 逐对比较等价于比较各坐标比值的极差
    best = Fraction(1)
    for a in range(len(vectors)):
        u = vectors[a]
        for b in range(a + 1, len(vectors)):
            v = vectors[b]
            ratios = [x / y for x, y in zip(u, v)]
            value = max(ratios) / min(ratios)
            if value > best:
                best = value
    return ProjectiveGauge(best, _log_display(best))


def ray_enclosure(columns: Sequence[Vector]) -> List[Tuple[Fraction, Fraction]]:
    """以最后一个坐标归一化后，各非末坐标比值在列间的 [min, max] 区间"""
    enclosure = []
    for i in range(len(columns[0]) - 1):
        ratios = [c[i] / c[-1] for c in columns]
        enclosure.append((min(ratios), max(ratios)))
    return enclosure


def limit_ray_certificate(system: InverseConeSystem, n: int, horizon: int,
                          tol: Any) -> Certificate:
    """射影塌缩证书

    对 m = n..horizon 计算 pi_nm；第一次所有项严格为正且列集合交比 < 1 + tol 时
    记为塌缩阶段。包络与交比取在视界内最后一个逐项为正的阶段。

    Args:
        system: 逆系统
        n: 起始阶段
        horizon: 最远阶段
        tol: 正有理容差

    Returns:
        Certificate: projective-collapse 或 no-collapse-within-horizon
    """
    tol = parse_rational(tol)
    if tol <= 0:
        raise ValueError("tol 必须为正")
    effective = system.effective_horizon(horizon)
    params = {'n': n, 'horizon': horizon, 'tol': tol}

    collapse_stage: Optional[int] = None
    collapse_gauge: Optional[ProjectiveGauge] = None
    last_positive: Optional[int] = None
    for m in range(n, effective + 1):
        composite = system.compose(n, m)
        if not composite.is_positive():
            continue
        last_positive = m
        if collapse_stage is None:
            gauge = projective_gauge(composite.columns())
            if gauge.cross_ratio < 1 + tol:
                collapse_stage, collapse_gauge = m, gauge
                logger.debug(f"阶段 {n} 在 m={m} 处射影塌缩")

    if collapse_stage is None:
        witness: Dict[str, Any] = {'last_positive_stage': last_positive}
        if last_positive is not None:
            witness['gauge_at_last_positive'] = projective_gauge(
                system.compose(n, last_positive).columns()).cross_ratio
        return Certificate(
            CertificateKind.NO_COLLAPSE, effective, 'limit_ray_certificate', params,
            witness=witness,
            summary=f"视界 {effective} 内 pi_{n}m 的列未塌缩为一条射线")

    # 塌缩之后若出现零列，取最后一个严格为正的阶段
    columns = system.compose(n, last_positive).columns()
    gauge = projective_gauge(columns)
    enclosure = ray_enclosure(columns)
    width = max((hi - lo for lo, hi in enclosure), default=Fraction(0))
    ratios = ', '.join(describe_rational((lo + hi) / 2) for lo, hi in enclosure)
    return Certificate(
        CertificateKind.PROJECTIVE_COLLAPSE, effective, 'limit_ray_certificate', params,
        witness={
            'collapse_stage': collapse_stage,
            'enclosure_stage': last_positive,
            'gauge_at_collapse': collapse_gauge.cross_ratio,
            'gauge': gauge.cross_ratio,
            'log_gauge': gauge.log_value,
            'enclosure': [list(pair) for pair in enclosure],
            'enclosure_width': width,
        },
        summary=(f"pi_{n}m 在 m={collapse_stage} 处交比低于 1+tol，"
                 f"阶段 {last_positive} 处 ln(交比) = {gauge.log_value:.3e}，"
                 f"射线坐标比 ≈ {ratios or '-'}"))


def trivial_limit_certificate(system: InverseConeSystem, n: int, horizon: int,
                              tol: Any) -> Certificate:
    """平凡极限证书

    两个条件同时成立才签发：pi_{n,horizon} 的每个非零列的非末坐标最大值与末坐标之比
    小于 tol；pi_{n-1} 把第 n 级的最后一个基向量映为 0。

    Args:
        system: 逆系统
        n: 阶段，至少为 2
        horizon: 最远阶段
        tol: 正有理容差

    Returns:
        Certificate: trivial-limit 或 not-trivial-within-horizon
    """
    if n < 2:
        raise HorizonError(f"平凡极限检查需要 pi_(n-1)，n 必须 >= 2: {n}")
    tol = parse_rational(tol)
    if tol <= 0:
        raise ValueError("tol 必须为正")
    effective = system.effective_horizon(horizon)
    params = {'n': n, 'horizon': horizon, 'tol': tol}

    composite = system.compose(n, effective)
    worst_ratio = Fraction(0)
    worst_column: Optional[int] = None
    nonzero = 0
    collapse_ok = True
    for j, column in enumerate(composite.columns(), start=1):
        if all(x == 0 for x in column):
            continue
        nonzero += 1
        if column[-1] == 0:
            collapse_ok = False
            worst_column, worst_ratio = j, None
            break
        ratio = max(column[:-1], default=Fraction(0)) / column[-1]
        if ratio > worst_ratio or worst_column is None:
            worst_ratio, worst_column = ratio, j
        if ratio >= tol:
            collapse_ok = False

    last_basis = system.dim(n) - 1
    annihilation_image = system.transition(n - 1).column(last_basis)
    annihilated = all(x == 0 for x in annihilation_image)

    witness = {
        'nonzero_columns': nonzero,
        'worst_column': worst_column,
        'worst_ratio': worst_ratio,
        'annihilated_basis': last_basis + 1,
        'annihilation_image': list(annihilation_image),
        'annihilated': annihilated,
    }
    if collapse_ok and annihilated:
        return Certificate(
            CertificateKind.TRIVIAL_LIMIT, effective, 'trivial_limit_certificate', params,
            witness=witness,
            summary=(f"pi_{n},{effective} 的非零列射影收敛到最后一个坐标，"
                     f"且 pi_{n - 1} 消去 e_{last_basis + 1}"))
    reason = '列未收敛到最后一个坐标' if not collapse_ok else f"pi_{n - 1} 未消去 e_{last_basis + 1}"
    return Certificate(
        CertificateKind.NOT_TRIVIAL, effective, 'trivial_limit_certificate', params,
        witness=witness, summary=f"视界 {effective} 内不能证明平凡极限: {reason}")


def polynomial_degree(sequence: Sequence) -> int:
    """用精确有限差分求相邻整数点采样序列的多项式次数

    次数 d 需要至少 d+2 项才能确认：第 d+1 阶差分至少要有一项且全为零。

    Args:
        sequence: 至少 3 项

    Returns:
        int: 次数；零序列返回 -1

    Raises:
        WindowTooShortError: 少于 3 项，或窗口内任何一阶差分都不全为零
    """
    values = list(parse_vector(sequence))
    if len(values) < 3:
        raise WindowTooShortError(f"差分窗口至少需要 3 项，当前 {len(values)} 项")
    if all(x == 0 for x in values):
        return -1
    level = values
    degree = 0
    while len(level) >= 2:
        following = [b - a for a, b in zip(level, level[1:])]
        if all(x == 0 for x in following):
            return degree
        level = following
        degree += 1
    raise WindowTooShortError(f"{len(values)} 项的窗口不足以确认多项式次数，至少需要 次数+2 项")


def _non_integer_stages(system: InverseConeSystem, upto: int) -> List[int]:
    stages = [n for n in range(1, upto) if not system.transition(n).is_integer()]
    if stages:
        logger.warning(f"阶段 {stages} 含非整数项，弧穿越计数语义不成立，检查继续")
    return stages


def directedness_check(system: InverseConeSystem, horizon: int) -> Certificate:
    """有向性：horizon 之前每个阶段矩阵都没有零行"""
    effective = system.effective_horizon(horizon)
    params = {'horizon': horizon}
    non_integer = _non_integer_stages(system, effective)
    for n in range(1, effective):
        zero_rows = system.transition(n).zero_rows()
        if zero_rows:
            row = zero_rows[0] + 1
            return Certificate(
                CertificateKind.NOT_DIRECTED, effective, 'directedness_check', params,
                witness={'stage': n, 'row': row, 'non_integer_stages': non_integer},
                summary=f"阶段 {n} 的第 {row} 行为零：第 {row} 条弧没有延伸")
    return Certificate(
        CertificateKind.DIRECTED, effective, 'directedness_check', params,
        witness={'stages_checked': effective - 1, 'non_integer_stages': non_integer},
        summary=f"阶段 1..{effective - 1} 均无零行")


def minimality_certificate(system: InverseConeSystem, n: int, horizon: int) -> Certificate:
    """极小性证书

    寻找 m0 (n < m0 <= horizon) 使 pi_{n,m0} 逐项为正，且阶段 m0..horizon-1 都没有零列。
    """
    effective = system.effective_horizon(horizon)
    params = {'n': n, 'horizon': horizon}
    non_integer = _non_integer_stages(system, effective)
    for m0 in range(n + 1, effective + 1):
        if not system.compose(n, m0).is_positive():
            continue
        blocking = next((k for k in range(m0, effective) if system.transition(k).zero_columns()), None)
        if blocking is None:
            return Certificate(
                CertificateKind.MINIMAL, effective, 'minimality_certificate', params,
                witness={'m0': m0, 'non_integer_stages': non_integer},
                summary=f"pi_{n},{m0} 逐项为正，之后各阶段无零列")
    return Certificate(
        CertificateKind.NOT_MINIMAL, effective, 'minimality_certificate', params,
        witness={'non_integer_stages': non_integer},
        summary=f"视界 {effective} 内找不到逐项为正且可向前传播的 pi_{n},m0")


_COMPUTATIONS: Dict[str, Callable[..., Certificate]] = {
    'base_exists': base_exists,
    'limit_ray_certificate': limit_ray_certificate,
    'trivial_limit_certificate': trivial_limit_certificate,
    'directedness_check': directedness_check,
    'minimality_certificate': minimality_certificate,
}


def recheck(system: InverseConeSystem, certificate: Certificate) -> bool:
    """按证书记录的计算重新执行，确认种类与见证完全一致"""
    try:
        computation = _COMPUTATIONS[certificate.computation]
    except KeyError:
        raise ValueError(f"未知的证书计算: {certificate.computation}")
    again = computation(system, **certificate.parameters)
    same = again.kind == certificate.kind and again.witness == certificate.witness
    if not same:
        logger.error(f"证书复算不一致: {certificate.computation}")
    return same


def column_gauges(system: InverseConeSystem, n: int, horizon: int) -> List[Tuple[int, Fraction]]:
    """pi_nm 非零列集合的交比随 m 的变化（只记录非零列全部严格为正的阶段）"""
    effective = system.effective_horizon(horizon)
    series = []
    for m in range(n, effective + 1):
        columns = [c for c in system.compose(n, m).columns() if any(x != 0 for x in c)]
        if columns and all(x > 0 for c in columns for x in c):
            series.append((m, projective_gauge(columns).cross_ratio))
    return series


def describe_rational(value: Fraction, digits: int = 12) -> str:
    """展示用十进制近似；不精确时以省略号结尾，如 1.61803398875…"""
    text = f"{float(value):.{digits}g}"
    return text if Fraction(text) == value else f"{text}…"


__all__ = [
    'BaseCriterionError', 'Certificate', 'CertificateKind', 'GaugeError', 'ProjectiveGauge',
    'SimplexStage', 'WindowTooShortError', 'base_exists', 'column_gauges', 'describe_rational',
    'directedness_check', 'limit_ray_certificate', 'minimality_certificate', 'polynomial_degree',
    'projective_gauge', 'pullback_base', 'ray_enclosure', 'recheck', 'trivial_limit_certificate',
    'vertex_images',
]
