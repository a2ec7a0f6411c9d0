"""
精确有理矩阵模块

负责所有标量与矩阵的精确运算，包括:
1. 有理数解析与 "p/q" 格式化
2. 非负转移矩阵的构造与校验
3. 矩阵乘法、矩阵向量乘法、列和与零行/零列检测
4. 精确秩计算
"""

import logging
from fractions import Fraction
from numbers import Rational
from typing import Iterable, List, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

RationalLike = Union[int, str, Fraction]
Vector = Tuple[Fraction, ...]


class RationalParseError(ValueError):
    """有理数解析失败"""


class MatrixError(ValueError):
    """矩阵形状或取值非法"""


def parse_rational(value: RationalLike) -> Fraction:
    """把整数、Fraction 或 "p/q" / 十进制字符串解析为精确有理数

    浮点数会被拒绝，二进制浮点无法精确表示大多数十进制小数。

    Args:
        value: 待解析的值

    Returns:
        Fraction: 最简形式的有理数
    """
    if isinstance(value, bool):
        raise RationalParseError(f"布尔值不是有理数: {value!r}")
    if isinstance(value, float):
        raise RationalParseError(f"不接受浮点数，请使用 \"p/q\" 字符串: {value!r}")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise RationalParseError("空字符串不是有理数")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise RationalParseError(f"无法解析有理数 {value!r}: {e}")
    raise RationalParseError(f"不支持的数值类型: {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    """格式化为 "p/q"，整数输出为 "p\""""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_vector(values: Iterable[RationalLike]) -> Vector:
    return tuple(parse_rational(v) for v in values)


def format_vector(values: Iterable[Fraction]) -> List[str]:
    return [format_rational(v) for v in values]


class TransitionMatrix:
    """非负精确有理矩阵

    按行存储，构造后不可变。对应相邻两级锥之间的转移映射，
    第 (i, j) 项表示后一级第 j 个坐标向前一级第 i 个坐标的贡献。
    """

    __slots__ = ('_entries', '_rows', '_cols')

    def __init__(self, entries: Sequence[Sequence[RationalLike]], allow_negative: bool = False):
        """构造矩阵

        Args:
            entries: 行优先的二维数据
            allow_negative: 是否允许负数项（仅用于中间差值计算）
        """
        rows = [tuple(parse_rational(x) for x in row) for row in entries]
        if not rows or not rows[0]:
            raise MatrixError("矩阵维数必须至少为 1x1")
        width = len(rows[0])
        for index, row in enumerate(rows, start=1):
            if len(row) != width:
                raise MatrixError(f"第 {index} 行长度为 {len(row)}，应为 {width}")
            if not allow_negative:
                for col, value in enumerate(row, start=1):
                    if value < 0:
                        raise MatrixError(f"位置 ({index}, {col}) 出现负数项 {format_rational(value)}")
        self._entries: Tuple[Vector, ...] = tuple(rows)
        self._rows = len(rows)
        self._cols = width

    @classmethod
    def _trusted(cls, rows: List[List[Fraction]]) -> 'TransitionMatrix':
        # 内部运算结果已是 Fraction 且形状正确，跳过逐项解析
        matrix = cls.__new__(cls)
        matrix._entries = tuple(tuple(row) for row in rows)
        matrix._rows = len(rows)
        matrix._cols = len(rows[0])
        return matrix

    @classmethod
    def identity(cls, size: int) -> 'TransitionMatrix':
        if size < 1:
            raise MatrixError("单位矩阵维数必须至少为 1")
        return cls([[1 if i == j else 0 for j in range(size)] for i in range(size)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'TransitionMatrix':
        return cls([[0] * cols for _ in range(rows)])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[RationalLike]]) -> 'TransitionMatrix':
        if not columns:
            raise MatrixError("矩阵维数必须至少为 1x1")
        height = len(columns[0])
        return cls([[columns[j][i] for j in range(len(columns))] for i in range(height)])

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> Tuple[int, int]:
        return (self._rows, self._cols)

    @property
    def entries(self) -> Tuple[Vector, ...]:
        return self._entries

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self._entries[i][j]

    def row(self, i: int) -> Vector:
        return self._entries[i]

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self._entries)

    def columns(self) -> List[Vector]:
        return [self.column(j) for j in range(self._cols)]

    def column_sums(self) -> Vector:
        return tuple(sum(self.column(j), Fraction(0)) for j in range(self._cols))

    def row_sums(self) -> Vector:
        return tuple(sum(row, Fraction(0)) for row in self._entries)

    def zero_columns(self) -> List[int]:
        """返回全零列的下标（从 0 开始）"""
        return [j for j in range(self._cols) if all(row[j] == 0 for row in self._entries)]

    def zero_rows(self) -> List[int]:
        """返回全零行的下标（从 0 开始）"""
        return [i for i, row in enumerate(self._entries) if all(x == 0 for x in row)]

    def is_positive(self) -> bool:
        """是否逐项严格为正"""
        return all(x > 0 for row in self._entries for x in row)

    def is_integer(self) -> bool:
        return all(x.denominator == 1 for row in self._entries for x in row)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self._entries for x in row)

    def __matmul__(self, other: 'TransitionMatrix') -> 'TransitionMatrix':
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        if self._cols != other._rows:
            raise MatrixError(f"矩阵乘法维数不匹配: {self.shape} @ {other.shape}")
        result = []
        for row in self._entries:
            # 按行累加，只访问非零项
            acc = [Fraction(0)] * other._cols
            for k, x in enumerate(row):
                if x == 0:
                    continue
                for j, y in enumerate(other._entries[k]):
                    if y != 0:
                        acc[j] += x * y
            result.append(acc)
        return TransitionMatrix._trusted(result)

    def apply(self, vector: Sequence[RationalLike]) -> Vector:
        """精确矩阵向量乘法

        Args:
            vector: 长度等于列数的向量

        Returns:
            Vector: 乘积向量
        """
        values = parse_vector(vector)
        if len(values) != self._cols:
            raise MatrixError(f"向量长度 {len(values)} 与矩阵列数 {self._cols} 不一致")
        return tuple(sum((x * v for x, v in zip(row, values) if x != 0), Fraction(0))
                     for row in self._entries)

    def scale(self, factor: RationalLike) -> 'TransitionMatrix':
        c = parse_rational(factor)
        return TransitionMatrix([[c * x for x in row] for row in self._entries], allow_negative=c < 0)

    def power(self, exponent: int) -> 'TransitionMatrix':
        if self._rows != self._cols:
            raise MatrixError("只有方阵可以求幂")
        if exponent < 0:
            raise MatrixError("指数不能为负")
        result = TransitionMatrix.identity(self._rows)
        base = self
        while exponent:
            if exponent & 1:
                result = result @ base
            base = base @ base
            exponent >>= 1
        return result

    def rank(self) -> int:
        """高斯消元求精确秩"""
        work = [list(row) for row in self._entries]
        rank = 0
        for col in range(self._cols):
            pivot: Optional[int] = next((r for r in range(rank, self._rows) if work[r][col] != 0), None)
            if pivot is None:
                continue
            work[rank], work[pivot] = work[pivot], work[rank]
            for r in range(self._rows):
                if r != rank and work[r][col] != 0:
                    factor = work[r][col] / work[rank][col]
                    work[r] = [a - factor * b for a, b in zip(work[r], work[rank])]
            rank += 1
            if rank == self._rows:
                break
        return rank

    def to_strings(self) -> List[List[str]]:
        return [format_vector(row) for row in self._entries]

    def to_ints(self) -> List[List[int]]:
        if not self.is_integer():
            raise MatrixError("矩阵含非整数项")
        return [[x.numerator for x in row] for row in self._entries]

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TransitionMatrix):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        return f"TransitionMatrix({self.to_strings()})"


def as_matrix(value: Union[TransitionMatrix, Sequence[Sequence[RationalLike]]]) -> TransitionMatrix:
    if isinstance(value, TransitionMatrix):
        return value
    return TransitionMatrix(value)
