"""
生成规则模块

负责按阶段确定性地生成转移矩阵，包括:
1. 周期规则（循环使用一组矩阵）
2. 下三角平移族（对角线/次对角线取值可配置，最后一列为零）
3. 内置例子族（按名称注册）
"""

import logging
from functools import lru_cache
from typing import Callable, Dict, List, Sequence, Union

from .matrix import (
    MatrixError,
    RationalLike,
    RationalParseError,
    TransitionMatrix,
    as_matrix,
    parse_rational,
)
from .schemas import GeneratorSpec, ValidationError, describe_validation_error

logger = logging.getLogger(__name__)


class GeneratorError(ValueError):
    """生成规则参数非法"""


class StageRule:
    """阶段矩阵生成规则基类

    子类实现 _build(n)；matrix(n) 带缓存，同一阶段总是返回同一个对象。
    """

    kind = 'abstract'

    def __init__(self):
        self._cached = lru_cache(maxsize=1024)(self._build)

    def matrix(self, n: int) -> TransitionMatrix:
        if n < 1:
            raise GeneratorError(f"阶段下标必须 >= 1: {n}")
        return self._cached(n)

    def dim(self, n: int) -> int:
        """第 n 级锥的维数 r(n)"""
        return self.matrix(n).rows

    def _build(self, n: int) -> TransitionMatrix:
        raise NotImplementedError

    def describe(self) -> Dict:
        return {'kind': self.kind}


class PeriodicRule(StageRule):
    """周期规则：第 n 级使用 matrices[(n-1) % len]"""

    kind = 'periodic'

    def __init__(self, matrices: Sequence):
        super().__init__()
        if not matrices:
            raise GeneratorError("周期规则至少需要一个矩阵")
        self.matrices: List[TransitionMatrix] = [as_matrix(m) for m in matrices]
        period = len(self.matrices)
        for k, current in enumerate(self.matrices):
            following = self.matrices[(k + 1) % period]
            if current.cols != following.rows:
                raise GeneratorError(
                    f"周期规则第 {k + 1} 个矩阵的列数 {current.cols} "
                    f"与下一个矩阵的行数 {following.rows} 不一致"
                )

    def _build(self, n: int) -> TransitionMatrix:
        return self.matrices[(n - 1) % len(self.matrices)]

    def describe(self) -> Dict:
        return {'kind': self.kind, 'period': len(self.matrices)}


class TriangularShiftRule(StageRule):
    """下三角平移族

    第 n 级是 n x (n+1) 矩阵：前 n 列为对角线取 diagonal、对角线以下取
    subdiagonal 的下三角块，最后一列为零。默认参数 (1, 2) 给出零测度层叠的转移矩阵。
    """

    kind = 'triangular-shift'

    def __init__(self, diagonal: RationalLike = 1, subdiagonal: RationalLike = 2):
        super().__init__()
        self.diagonal = parse_rational(diagonal)
        self.subdiagonal = parse_rational(subdiagonal)
        if self.diagonal < 0 or self.subdiagonal < 0:
            raise GeneratorError("下三角平移族的取值必须非负")

    def _build(self, n: int) -> TransitionMatrix:
        rows = []
        for i in range(n):
            row = []
            for j in range(n + 1):
                if j == n or j > i:
                    row.append(0)
                elif j == i:
                    row.append(self.diagonal)
                else:
                    row.append(self.subdiagonal)
            rows.append(row)
        return TransitionMatrix(rows)

    def square_block(self, size: int) -> TransitionMatrix:
        """所有阶段共享的 size x size 左上角块，用作矩阵幂校验"""
        return TransitionMatrix([
            [self.diagonal if i == j else (self.subdiagonal if j < i else 0) for j in range(size)]
            for i in range(size)
        ])

    def describe(self) -> Dict:
        return {
            'kind': self.kind,
            'diagonal': str(self.diagonal),
            'subdiagonal': str(self.subdiagonal)
        }


class FunctionRule(StageRule):
    """由函数 n -> 矩阵 定义的内置族"""

    kind = 'builtin'

    def __init__(self, name: str, build: Callable[[int], TransitionMatrix]):
        super().__init__()
        self.name = name
        self._builder = build

    def _build(self, n: int) -> TransitionMatrix:
        return self._builder(n)

    def describe(self) -> Dict:
        return {'kind': self.kind, 'name': self.name}


def _identity_with_extra(size: int, extra_column: Sequence[int]) -> TransitionMatrix:
    """size 阶单位阵右侧追加一列"""
    rows = []
    for i in range(size):
        rows.append([1 if i == j else 0 for j in range(size)] + [extra_column[i]])
    return TransitionMatrix(rows)


def _ordinal_family(n: int) -> TransitionMatrix:
    # 新弧与最后一条旧弧同伦
    extra = [0] * n
    extra[n - 1] = 1
    return _identity_with_extra(n, extra)


def _two_limit_family(n: int) -> TransitionMatrix:
    # 新弧同时穿过前两条旧弧
    extra = [0] * (n + 1)
    extra[0] = extra[1] = 1
    return _identity_with_extra(n + 1, extra)


def _escaping_family(n: int) -> TransitionMatrix:
    # 新弧不进入 X_n，对应零列
    return _identity_with_extra(n, [0] * n)


def _closed_curve_family(n: int) -> TransitionMatrix:
    """闭曲线 + 真叶族

    第 n 级坐标为 (u_1..u_n, y_1..y_n)：y_i 为闭曲线 Gamma_i 的权重，
    u_j = x_j - (y_1 + ... + y_n) 是真叶 L_j 的权重扣除前 n 条闭曲线后的余量。
    转移映射 u_j = u'_j + y'_{n+1}，y 坐标由单位块保持，u'_{n+1} 对应零列。
    各级 u_j >= 0 合起来即 x_j >= sum_i y_i（对每个 j）。
    """
    rows = []
    width = 2 * (n + 1)
    for i in range(n):
        row = [0] * width
        row[i] = 1
        row[(n + 1) + n] = 1
        rows.append(row)
    for i in range(n):
        row = [0] * width
        row[(n + 1) + i] = 1
        rows.append(row)
    return TransitionMatrix(rows)


_ALTERNATING = PeriodicRule([[[1, 1], [0, 1]], [[1, 0], [1, 1]]])

BUILTIN_RULES: Dict[str, Callable[[], StageRule]] = {
    'example-4.3': lambda: FunctionRule('example-4.3', _ordinal_family),
    'example-4.4': lambda: FunctionRule('example-4.4', _two_limit_family),
    'example-4.5': lambda: _ALTERNATING,
    'nobase-4.6': lambda: FunctionRule('nobase-4.6', _escaping_family),
    'zero-measure-8.1': lambda: TriangularShiftRule(1, 2),
    'nobase-8.2': lambda: FunctionRule('nobase-8.2', _closed_curve_family),
}


def builtin_rule(name: str) -> StageRule:
    """按名称取内置生成规则

    Args:
        name: 内置族名称

    Returns:
        StageRule: 生成规则
    """
    try:
        return BUILTIN_RULES[name]()
    except KeyError:
        raise GeneratorError(f"未知的内置族: {name}，可选: {', '.join(sorted(BUILTIN_RULES))}")


def rule_from_config(data: Union[Dict, GeneratorSpec]) -> StageRule:
    """从 JSON 描述构造生成规则

    支持 {"kind": "periodic", "matrices": [...]}、
    {"kind": "builtin", "name": ...}、
    {"kind": "triangular-shift", "diagonal": "1", "subdiagonal": "2"}。
    """
    try:
        generator = data if isinstance(data, GeneratorSpec) else GeneratorSpec.model_validate(data)
    except ValidationError as e:
        raise GeneratorError(f"生成规则描述非法: {describe_validation_error(e)}") from e

    try:
        if generator.kind == 'periodic':
            return PeriodicRule(generator.matrices or [])
        if generator.kind == 'builtin':
            return builtin_rule(generator.name)
        return TriangularShiftRule(
            1 if generator.diagonal is None else generator.diagonal,
            2 if generator.subdiagonal is None else generator.subdiagonal,
        )
    except (MatrixError, RationalParseError) as e:
        raise GeneratorError(f"生成规则矩阵非法: {e}") from e
