"""
内置例子模块

负责内置逆系统及其可机器检查的预期事实，包括:
1. 按名称取内置系统（例子族、无基族、零测度族、单阶段冒烟系统）
2. 每个例子的事实清单与逐条运行
3. l1 型线程的构造与往返检查
4. 零测度族的矩阵幂校验与黄金比例的精确区间检查
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .cone_core import InverseConeSystem, Thread, ThreadDataError, ThreadReport, apply, check_thread
from .generators import TriangularShiftRule, builtin_rule
from .limit_analysis import (
    CertificateKind,
    base_exists,
    directedness_check,
    limit_ray_certificate,
    minimality_certificate,
    polynomial_degree,
    pullback_base,
    trivial_limit_certificate,
    vertex_images,
)
from .matrix import TransitionMatrix, format_rational, format_vector, parse_vector

logger = logging.getLogger(__name__)

FactCheck = Callable[[InverseConeSystem], Tuple[bool, Dict[str, Any]]]


class UnknownExampleError(ValueError):
    """未知的内置例子名称"""


@dataclass
class ExpectedFact:
    name: str
    description: str
    check: FactCheck


@dataclass
class FactOutcome:
    name: str
    description: str
    passed: bool
    detail: Dict[str, Any] = field(default_factory=dict)


@dataclass
class BuiltinExample:
    """内置例子：系统 + 预期事实 + 不作断言的结构性注记"""

    name: str
    system: InverseConeSystem
    expected_facts: List[ExpectedFact]
    annotation: str = ''

    def run_facts(self) -> List[FactOutcome]:
        outcomes = []
        for fact in self.expected_facts:
            try:
                passed, detail = fact.check(self.system)
            except (ValueError, ArithmeticError) as e:
                logger.error(f"事实 {self.name}/{fact.name} 执行失败: {e}")
                passed, detail = False, {'error': str(e)}
            if not passed:
                logger.warning(f"事实未通过: {self.name}/{fact.name}")
            outcomes.append(FactOutcome(fact.name, fact.description, passed, detail))
        return outcomes


# 各例子前几级的显式矩阵
DISPLAYED_MATRICES: Dict[str, Dict[int, List[List[int]]]] = {
    'example-4.3': {
        1: [[1, 1]],
        2: [[1, 0, 0], [0, 1, 1]],
        3: [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 1]],
    },
    'example-4.4': {1: [[1, 0, 1], [0, 1, 1]]},
    'example-4.5': {1: [[1, 1], [0, 1]], 2: [[1, 0], [1, 1]]},
    'nobase-4.6': {1: [[1, 0]]},
    'zero-measure-8.1': {
        1: [[1, 0]],
        2: [[1, 0, 0], [2, 1, 0]],
        3: [[1, 0, 0, 0], [2, 1, 0, 0], [2, 2, 1, 0]],
        4: [[1, 0, 0, 0, 0], [2, 1, 0, 0, 0], [2, 2, 1, 0, 0], [2, 2, 2, 1, 0]],
    },
}

TRANSITION_41 = [[3, 2, 0], [0, 1, 0]]


def power_oracle(power: int, j: int) -> Fraction:
    """零测度族的 a_j^i = (A^i)_{j+1,1}，A 为对角 1、对角线下 2 的方阵"""
    block = TriangularShiftRule(1, 2).square_block(j + 1)
    return block.power(power)[j, 0]


def golden_enclosed(lo: Fraction, hi: Fraction) -> bool:
    """[lo, hi] 是否包含 (1+sqrt5)/2，用 x^2-x-1 的符号精确判断"""
    return lo > Fraction(1, 2) and lo * lo - lo - 1 <= 0 <= hi * hi - hi - 1


def conjugate_enclosed(lo: Fraction, hi: Fraction) -> bool:
    """[lo, hi] 是否包含 (sqrt5-1)/2，用 x^2+x-1 的符号精确判断"""
    return lo >= 0 and lo * lo + lo - 1 <= 0 <= hi * hi + hi - 1


def _displayed(name: str) -> ExpectedFact:
    def check(system: InverseConeSystem):
        mismatched = [n for n, rows in DISPLAYED_MATRICES[name].items()
                      if system.transition(n) != TransitionMatrix(rows)]
        return not mismatched, {'stages': sorted(DISPLAYED_MATRICES[name]), 'mismatched': mismatched}
    return ExpectedFact('displayed-matrices', '生成规则逐项复现各例子的显式矩阵', check)


def _certificate_kind(label: str, description: str, kind: CertificateKind,
                      run: Callable[[InverseConeSystem], Any],
                      witness: Optional[Dict[str, Any]] = None) -> ExpectedFact:
    def check(system: InverseConeSystem):
        certificate = run(system)
        passed = certificate.kind == kind
        if witness:
            passed = passed and all(certificate.witness.get(k) == v for k, v in witness.items())
        return passed, {'kind': certificate.kind.value, 'witness': certificate.witness}
    return ExpectedFact(label, description, check)


def _compose_equals(n: int, m: int, rows: List[List[int]]) -> ExpectedFact:
    def check(system: InverseConeSystem):
        composite = system.compose(n, m)
        return composite == TransitionMatrix(rows), {'compose': composite.to_strings()}
    return ExpectedFact(f"compose-{n}-{m}", f"pi_{n}{m} = {rows}", check)


def _ordinal_facts() -> List[ExpectedFact]:
    def vertex_shadow(system: InverseConeSystem):
        n = 3
        images = vertex_images(system, n, n + 1)
        expected = [tuple(Fraction(int(i == min(j, n - 1))) for i in range(n)) for j in range(n + 1)]
        return images == expected, {'images': [format_vector(v) for v in images]}

    def point_stage(system: InverseConeSystem):
        images = vertex_images(system, 1, 2)
        return images == [(Fraction(1),), (Fraction(1),)], {'images': [format_vector(v) for v in images]}

    def thread(system: InverseConeSystem):
        result = ell1_thread_roundtrip('example-4.3', 1, ['1/2', '1/4'], 3, system=system)
        return result.ok, {'thread': result.thread.to_strings()}

    return [
        _displayed('example-4.3'),
        _compose_equals(1, 3, [[1, 1, 1]]),
        _certificate_kind('base-exists', '视界 10 内各阶段无零列', CertificateKind.BASE_EXISTS,
                          lambda s: base_exists(s, 10)),
        ExpectedFact('stage-1-is-point', 'B_1 是一个点，B_2 的两个顶点都映到它', point_stage),
        ExpectedFact('vertex-shadow', 'v_{n+1} 映到 v_n，其余顶点不动', vertex_shadow),
        ExpectedFact('thread-roundtrip', '(x=1, y=(1/2,1/4)) 的线程一致且可还原', thread),
    ]


def _two_limit_facts() -> List[ExpectedFact]:
    def midpoint(system: InverseConeSystem):
        images = vertex_images(system, 1, 2)
        third = images[2]
        return third == (Fraction(1, 2), Fraction(1, 2)), {'third_vertex': format_vector(third)}

    def base_stage(system: InverseConeSystem):
        functional = pullback_base(system, 2).functional
        return functional == (1, 1, 2), {'column_sums': format_vector(functional)}

    def thread(system: InverseConeSystem):
        result = ell1_thread_roundtrip('example-4.4', ['1', '2/3'], ['1/3', '1/6'], 3, system=system)
        return result.ok, {'thread': result.thread.to_strings()}

    return [
        _displayed('example-4.4'),
        _certificate_kind('base-exists', '视界 10 内各阶段无零列', CertificateKind.BASE_EXISTS,
                          lambda s: base_exists(s, 10)),
        ExpectedFact('base-stage-2', 'B_2 的顶点为 e_1, e_2, e_3/2', base_stage),
        ExpectedFact('vertex-midpoint', 'B_2 的第三个顶点映到 (1/2, 1/2)', midpoint),
        ExpectedFact('thread-roundtrip', '两个极限的线程一致且可还原', thread),
    ]


def _golden_facts() -> List[ExpectedFact]:
    bound = Fraction(1, 10 ** 12)

    def golden_ray(system: InverseConeSystem):
        certificate = limit_ray_certificate(system, 1, 60, bound)
        if certificate.kind != CertificateKind.PROJECTIVE_COLLAPSE:
            return False, {'kind': certificate.kind.value}
        lo, hi = certificate.witness['enclosure'][0]
        gauge = certificate.witness['gauge']
        passed = golden_enclosed(lo, hi) and hi - lo < bound and gauge - 1 < bound
        return passed, {'enclosure': [format_rational(lo), format_rational(hi)],
                        'gauge_minus_one': format_rational(gauge - 1)}

    def conjugate_ray(system: InverseConeSystem):
        certificate = limit_ray_certificate(system, 2, 60, bound)
        if certificate.kind != CertificateKind.PROJECTIVE_COLLAPSE:
            return False, {'kind': certificate.kind.value}
        lo, hi = certificate.witness['enclosure'][0]
        return conjugate_enclosed(lo, hi), {'enclosure': [format_rational(lo), format_rational(hi)]}

    return [
        _displayed('example-4.5'),
        _compose_equals(1, 3, [[2, 1], [1, 1]]),
        ExpectedFact('golden-ray', '阶段 1 的射线坐标比在 1e-12 内包含黄金比例', golden_ray),
        ExpectedFact('even-stage-ray', '阶段 2 的射线坐标比包含黄金比例减一', conjugate_ray),
        _certificate_kind('minimal', 'pi_13 逐项为正，m0 = 3', CertificateKind.MINIMAL,
                          lambda s: minimality_certificate(s, 1, 3), {'m0': 3}),
        _certificate_kind('not-trivial', '塌缩射线严格为正，不是平凡极限', CertificateKind.NOT_TRIVIAL,
                          lambda s: trivial_limit_certificate(s, 2, 60, Fraction(1, 100))),
    ]


def _escaping_facts() -> List[ExpectedFact]:
    return [
        _displayed('nobase-4.6'),
        _certificate_kind('base-fails', '阶段 1 的第 2 列为零', CertificateKind.BASE_CRITERION_FAILS,
                          lambda s: base_exists(s, 5), {'stage': 1, 'column': 2}),
        _certificate_kind('directed', '各阶段无零行', CertificateKind.DIRECTED,
                          lambda s: directedness_check(s, 10)),
        _certificate_kind('not-minimal', '每个阶段都有零列', CertificateKind.NOT_MINIMAL,
                          lambda s: minimality_certificate(s, 1, 10)),
    ]


def _zero_measure_facts() -> List[ExpectedFact]:
    def degrees(system: InverseConeSystem):
        found = {j: polynomial_degree([power_oracle(i, j) for i in range(1, 11)]) for j in (1, 2, 3)}
        return found == {1: 1, 2: 2, 3: 3}, {'degrees': found}

    def ratio_at_hundred(system: InverseConeSystem):
        ratio = power_oracle(100, 1) / power_oracle(100, 2)
        return ratio == Fraction(1, 100), {'ratio': format_rational(ratio)}

    def oracle_matches(system: InverseConeSystem):
        # pi_{3,3+i} 的第 1 列就是 A^i 的第 1 列
        mismatched = []
        for i in range(1, 11):
            column = system.compose(3, 3 + i).column(0)
            if column[1:] != (power_oracle(i, 1), power_oracle(i, 2)):
                mismatched.append(i)
        return not mismatched, {'mismatched': mismatched}

    return [
        _displayed('zero-measure-8.1'),
        _certificate_kind('directed', '第 i 行含对角线上的 1', CertificateKind.DIRECTED,
                          lambda s: directedness_check(s, 10)),
        _certificate_kind('base-fails', '每个 pi_n 的最后一列为零', CertificateKind.BASE_CRITERION_FAILS,
                          lambda s: base_exists(s, 5), {'stage': 1, 'column': 2}),
        _certificate_kind('trivial-limit', 'n=3, 视界 103, tol 1/50', CertificateKind.TRIVIAL_LIMIT,
                          lambda s: trivial_limit_certificate(s, 3, 103, Fraction(1, 50)),
                          {'worst_ratio': Fraction(1, 100), 'annihilated': True}),
        ExpectedFact('polynomial-degrees', 'a_j^i 关于 i 的次数为 j (j=1,2,3)', degrees),
        ExpectedFact('ratio-at-100', 'a_1^100 / a_2^100 = 1/100', ratio_at_hundred),
        ExpectedFact('oracle-agrees', '矩阵幂与复合映射一致', oracle_matches),
    ]


def _closed_curve_facts() -> List[ExpectedFact]:
    def persistent(system: InverseConeSystem):
        broken = []
        for n in range(1, 8):
            matrix = system.transition(n)
            for i in range(n):
                expected = [Fraction(int(c == n + 1 + i)) for c in range(matrix.cols)]
                if list(matrix.row(n + i)) != expected:
                    broken.append(n)
                    break
        return not broken, {'broken_stages': broken}

    return [
        _certificate_kind('base-fails', '真叶坐标在阶段 1 即出现零列', CertificateKind.BASE_CRITERION_FAILS,
                          lambda s: base_exists(s, 5), {'stage': 1, 'column': 2}),
        _certificate_kind('directed', '各阶段无零行', CertificateKind.DIRECTED,
                          lambda s: directedness_check(s, 10)),
        ExpectedFact('closed-curves-persist', '闭曲线坐标由单位块逐级保持', persistent),
    ]


def _transition_facts() -> List[ExpectedFact]:
    def image(system: InverseConeSystem):
        result = apply(system.transition(1), [1, 1, 1])
        return result == (5, 1), {'image': format_vector(result)}

    return [
        ExpectedFact('apply', '[[3,2,0],[0,1,0]] (1,1,1) = (5,1)', image),
        _certificate_kind('base-fails', '第 3 列为零', CertificateKind.BASE_CRITERION_FAILS,
                          lambda s: base_exists(s, 2), {'stage': 1, 'column': 3}),
        _certificate_kind('directed', '两行都非零', CertificateKind.DIRECTED,
                          lambda s: directedness_check(s, 2)),
    ]


def _builtin_system(name: str) -> InverseConeSystem:
    return InverseConeSystem(rule=builtin_rule(name), name=name)


_REGISTRY: Dict[str, Callable[[], BuiltinExample]] = {
    'example-4.3': lambda: BuiltinExample(
        'example-4.3', _builtin_system('example-4.3'), _ordinal_facts(),
        '极限锥同构于 R_+ x l1 型锥 {(x, y): y_i >= 0, x >= sum y_i}'),
    'example-4.4': lambda: BuiltinExample(
        'example-4.4', _builtin_system('example-4.4'), _two_limit_facts(),
        '两个真叶共用同一列新弧；B_n 的顶点像取中点'),
    'example-4.5': lambda: BuiltinExample(
        'example-4.5', _builtin_system('example-4.5'), _golden_facts(),
        '唯一遍历：极限锥是一条射线，方向比为黄金比例'),
    'nobase-4.6': lambda: BuiltinExample(
        'nobase-4.6', _builtin_system('nobase-4.6'), _escaping_facts(),
        '极限锥线性同胚于 R_+^N，没有紧基（结构性结论，不作断言）'),
    'zero-measure-8.1': lambda: BuiltinExample(
        'zero-measure-8.1', _builtin_system('zero-measure-8.1'), _zero_measure_facts(),
        '非零列射影收敛到最后一个坐标，而该坐标在前一阶段被消去'),
    'nobase-8.2': lambda: BuiltinExample(
        'nobase-8.2', _builtin_system('nobase-8.2'), _closed_curve_facts(),
        '闭曲线坐标与真叶坐标并存，极限锥为 l1 x R_+^N 型（不作断言）'),
    'transition-4.1': lambda: BuiltinExample(
        'transition-4.1', InverseConeSystem([TRANSITION_41], name='transition-4.1'), _transition_facts()),
}

BUILTIN_NAMES = tuple(sorted(_REGISTRY))


def builtin(name: str) -> BuiltinExample:
    """按名称取内置例子

    Args:
        name: 例子名称

    Returns:
        BuiltinExample: 系统与预期事实
    """
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownExampleError(f"未知的内置例子: {name}，可选: {', '.join(BUILTIN_NAMES)}")
    return factory()


@dataclass
class ThreadRoundtrip:
    thread: Thread
    report: ThreadReport
    x: Tuple[Fraction, ...]
    y: Tuple[Fraction, ...]
    recovered_x: Tuple[Fraction, ...]
    recovered_y: Tuple[Fraction, ...]

    @property
    def ok(self) -> bool:
        return self.report.consistent and self.recovered_x == self.x and self.recovered_y == self.y


def _check_ell1_data(x: Tuple[Fraction, ...], y: Tuple[Fraction, ...]):
    for index, value in enumerate(x, start=1):
        if value < 0:
            raise ThreadDataError(f"x_{index} = {format_rational(value)} 为负")
    partial = Fraction(0)
    for index, value in enumerate(y, start=1):
        if value < 0:
            raise ThreadDataError(f"y_{index} = {format_rational(value)} 为负")
        partial += value
        for k, bound in enumerate(x, start=1):
            if partial > bound:
                raise ThreadDataError(
                    f"部分和 y_1+...+y_{index} = {format_rational(partial)} 超过 x_{k} = {format_rational(bound)}")


def ell1_thread_roundtrip(name: str, x: Any, y: Sequence[Any], N: Optional[int] = None,
                          system: Optional[InverseConeSystem] = None) -> ThreadRoundtrip:
    """按显式公式构造线程并检查往返

    example-4.3 的第 n 级为 (y_1, ..., y_{n-1}, x - sum_{i<n} y_i)；
    example-4.4 的第 n 级为 (x_1 - S, x_2 - S, y_1, ..., y_{n-1})，S = sum_{i<n} y_i。

    Args:
        name: 'example-4.3' 或 'example-4.4'
        x: 4.3 为单个有理数，4.4 为两个有理数
        y: y 序列前缀，长度至少 N-1
        N: 截断阶段数，默认 len(y)+1
        system: 可选的已构造系统

    Returns:
        ThreadRoundtrip: 线程、一致性报告与还原出的 (x, y)
    """
    if name not in ('example-4.3', 'example-4.4'):
        raise UnknownExampleError(f"只有 example-4.3 与 example-4.4 支持 l1 线程: {name}")
    xs = parse_vector(x if isinstance(x, (list, tuple)) else [x])
    expected_x = 1 if name == 'example-4.3' else 2
    if len(xs) != expected_x:
        raise ThreadDataError(f"{name} 需要 {expected_x} 个 x 分量，实际 {len(xs)} 个")
    ys = parse_vector(y)
    N = len(ys) + 1 if N is None else N
    if N < 1:
        raise ThreadDataError(f"截断阶段数必须 >= 1: {N}")
    if len(ys) < N - 1:
        raise ThreadDataError(f"截断到 {N} 级需要至少 {N - 1} 个 y 分量，实际 {len(ys)} 个")
    ys = ys[:N - 1]
    _check_ell1_data(xs, ys)

    stages = []
    for n in range(1, N + 1):
        prefix = ys[:n - 1]
        spent = sum(prefix, Fraction(0))
        if name == 'example-4.3':
            stages.append(prefix + (xs[0] - spent,))
        else:
            stages.append((xs[0] - spent, xs[1] - spent) + prefix)
    thread = Thread(tuple(stages))

    system = system or _builtin_system(name)
    report = check_thread(system, thread)

    last = thread.stages[-1]
    if name == 'example-4.3':
        recovered_y = last[:-1]
        recovered_x = (sum(last, Fraction(0)),)
    else:
        recovered_y = last[2:]
        spent = sum(recovered_y, Fraction(0))
        recovered_x = (last[0] + spent, last[1] + spent)
    return ThreadRoundtrip(thread, report, xs, ys, recovered_x, tuple(recovered_y))


def run_example(name: str) -> Tuple[BuiltinExample, List[FactOutcome]]:
    example = builtin(name)
    outcomes = example.run_facts()
    logger.info(f"例子 {name}: {sum(o.passed for o in outcomes)}/{len(outcomes)} 条事实通过")
    return example, outcomes
