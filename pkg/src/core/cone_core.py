"""
锥逆系统核心模块

负责逆系统 C_1 <- C_2 <- ... 的建模，包括:
1. 系统描述的解析与校验
2. 按阶段取转移矩阵（显式前缀 + 生成规则）
3. 复合映射 pi_nm 的增量缓存
4. 线程（有限截断的逆极限元素）一致性检查
"""

import logging
from dataclasses import dataclass
from threading import Lock
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .generators import GeneratorError, StageRule, rule_from_config
from .matrix import (
    MatrixError,
    RationalParseError,
    TransitionMatrix,
    Vector,
    as_matrix,
    format_vector,
    parse_rational,
    parse_vector,
)
from .schemas import SystemFile, ValidationError, describe_validation_error

logger = logging.getLogger(__name__)


class SystemFileError(ValueError):
    """系统描述无法解析（结构或数值格式错误）"""


class SystemValidationError(ValueError):
    """系统不满足形状或非负性约束"""

    def __init__(self, message: str, stage: Optional[int] = None):
        super().__init__(message)
        self.stage = stage


class HorizonError(ValueError):
    """阶段下标越界"""


class ThreadDataError(ValueError):
    """线程向量维数与系统不符"""


class InverseConeSystem:
    """正卦限锥的逆系统

    第 n 级锥为 R_+^{r(n)}，transition(n) 是 r(n) x r(n+1) 矩阵。
    前 len(prefix) 级取显式矩阵，其余交给生成规则；没有生成规则时系统有限。
    """

    def __init__(self, prefix: Sequence = (), rule: Optional[StageRule] = None,
                 name: Optional[str] = None):
        self.prefix: Tuple[TransitionMatrix, ...] = tuple(as_matrix(m) for m in prefix)
        self.rule = rule
        self.name = name
        if not self.prefix and rule is None:
            raise SystemValidationError("系统为空：至少需要一个阶段矩阵或生成规则")

        for k in range(len(self.prefix) - 1):
            if self.prefix[k].cols != self.prefix[k + 1].rows:
                raise SystemValidationError(
                    f"阶段 {k + 1} 的列数 {self.prefix[k].cols} 与阶段 {k + 2} 的行数 "
                    f"{self.prefix[k + 1].rows} 不一致", stage=k + 1)
        if self.prefix and rule is not None:
            junction = len(self.prefix) + 1
            following = rule.matrix(junction)
            if self.prefix[-1].cols != following.rows:
                raise SystemValidationError(
                    f"阶段 {junction - 1} 的列数 {self.prefix[-1].cols} 与生成规则在阶段 "
                    f"{junction} 的行数 {following.rows} 不一致", stage=junction - 1)

        # n -> [pi_{n,n}, pi_{n,n+1}, ...]
        self._compose_cache: Dict[int, List[TransitionMatrix]] = {}
        self._cache_lock = Lock()

    @property
    def is_finite(self) -> bool:
        return self.rule is None

    @property
    def last_stage(self) -> Optional[int]:
        """有限系统的最后一级锥下标，无限系统返回 None"""
        return len(self.prefix) + 1 if self.is_finite else None

    def effective_horizon(self, horizon: int) -> int:
        """把 horizon 截断到系统实际存在的最后一级"""
        if self.is_finite and horizon > self.last_stage:
            logger.warning(f"horizon {horizon} 超出有限系统的最后一级 {self.last_stage}，已截断")
            return self.last_stage
        return horizon

    def transition(self, n: int) -> TransitionMatrix:
        """第 n 级转移矩阵 pi_n

        Args:
            n: 阶段下标（从 1 开始）

        Returns:
            TransitionMatrix: r(n) x r(n+1) 矩阵
        """
        if n < 1:
            raise HorizonError(f"阶段下标必须 >= 1: {n}")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if self.rule is None:
            raise HorizonError(f"阶段 {n} 超出显式前缀（共 {len(self.prefix)} 级）且没有生成规则")
        return self.rule.matrix(n)

    def dim(self, n: int) -> int:
        if n < 1:
            raise HorizonError(f"阶段下标必须 >= 1: {n}")
        if self.is_finite and n == self.last_stage:
            return self.prefix[-1].cols
        return self.transition(n).rows

    def dims(self, upto: int) -> List[int]:
        return [self.dim(n) for n in range(1, upto + 1)]

    def compose(self, n: int, m: int) -> TransitionMatrix:
        """复合映射 pi_nm = pi_n pi_{n+1} ... pi_{m-1}

        Args:
            n: 起始阶段
            m: 终止阶段，compose(n, n) 为单位阵

        Returns:
            TransitionMatrix: r(n) x r(m) 矩阵
        """
        if n < 1 or m < n:
            raise HorizonError(f"复合下标非法: n={n}, m={m}")
        if self.is_finite and m > self.last_stage:
            raise HorizonError(f"阶段 {m} 超出有限系统的最后一级 {self.last_stage}")

        with self._cache_lock:
            chain = self._compose_cache.get(n)
            if chain is None:
                chain = [TransitionMatrix.identity(self.dim(n))]
                self._compose_cache[n] = chain
            while len(chain) <= m - n:
                k = n + len(chain) - 1
                chain.append(chain[-1] @ self.transition(k))
            return chain[m - n]

    def describe(self) -> Dict[str, Any]:
        info: Dict[str, Any] = {'explicit_stages': len(self.prefix)}
        if self.name:
            info['name'] = self.name
        if self.rule is not None:
            info['generator'] = self.rule.describe()
        return info


def apply(matrix: TransitionMatrix, vector: Sequence) -> Vector:
    """非负矩阵作用于非负向量

    Args:
        matrix: 转移矩阵
        vector: 非负向量，长度等于矩阵列数

    Returns:
        Vector: 精确乘积，仍为非负
    """
    values = parse_vector(vector)
    for index, value in enumerate(values, start=1):
        if value < 0:
            raise MatrixError(f"向量第 {index} 个分量为负: {value}")
    return matrix.apply(values)


@dataclass(frozen=True)
class Thread:
    """有限线程 (w_1, ..., w_N)，w_n 属于第 n 级锥"""

    stages: Tuple[Vector, ...]

    @classmethod
    def of(cls, stages: Sequence[Sequence]) -> 'Thread':
        return cls(tuple(parse_vector(s) for s in stages))

    def __len__(self) -> int:
        return len(self.stages)

    def to_strings(self) -> List[List[str]]:
        return [format_vector(s) for s in self.stages]


@dataclass
class ThreadReport:
    """线程一致性报告"""

    consistent: bool
    checked_stages: int
    failing_stage: Optional[int] = None
    expected: Optional[Vector] = None
    actual: Optional[Vector] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'consistent': self.consistent,
            'checked_stages': self.checked_stages,
        }
        if self.failing_stage is not None:
            data['failing_stage'] = self.failing_stage
            data['expected'] = format_vector(self.expected or ())
            data['actual'] = format_vector(self.actual or ())
        return data


def check_thread(system: InverseConeSystem, thread: Thread) -> ThreadReport:
    """检查 pi_n(w_{n+1}) = w_n 是否对每一级精确成立

    Args:
        system: 逆系统
        thread: 待检查线程

    Returns:
        ThreadReport: 一致时 consistent=True；否则给出第一个失败阶段
    """
    for n, vector in enumerate(thread.stages, start=1):
        if len(vector) != system.dim(n):
            raise ThreadDataError(f"线程第 {n} 级长度为 {len(vector)}，应为 {system.dim(n)}")
        if any(x < 0 for x in vector):
            raise ThreadDataError(f"线程第 {n} 级含负分量")

    for n in range(1, len(thread.stages)):
        image = system.transition(n).apply(thread.stages[n])
        if image != thread.stages[n - 1]:
            logger.debug(f"线程在阶段 {n} 不一致")
            return ThreadReport(False, len(thread.stages), failing_stage=n,
                                expected=thread.stages[n - 1], actual=image)
    return ThreadReport(True, len(thread.stages))


def parse_matrix(raw: Sequence[Sequence], where: str, stage: Optional[int] = None) -> TransitionMatrix:
    """把已通过结构校验的矩阵解析为 TransitionMatrix

    Args:
        raw: 整数或 "p/q" 字符串组成的二维数组
        where: 出错时报告的位置
        stage: 所属阶段，写入 SystemValidationError

    Returns:
        TransitionMatrix: 非负的精确有理矩阵
    """
    try:
        parsed = [[parse_rational(x) for x in row] for row in raw]
    except RationalParseError as e:
        raise SystemFileError(f"{where}: {e}") from e
    try:
        return TransitionMatrix(parsed)
    except MatrixError as e:
        raise SystemValidationError(f"{where}: {e}", stage=stage) from e


def validate_system(data: Any) -> InverseConeSystem:
    """把原始系统描述校验为 InverseConeSystem

    Args:
        data: 形如 {"dims": [...], "matrices": [...], "generator": null | {...}} 的字典

    Returns:
        InverseConeSystem: 满足全部形状与非负约束的系统
    """
    try:
        system_file = data if isinstance(data, SystemFile) else SystemFile.model_validate(data)
    except ValidationError as e:
        raise SystemFileError(f"系统描述非法: {describe_validation_error(e)}") from e

    matrices = [parse_matrix(raw, f"阶段 {stage}", stage)
                for stage, raw in enumerate(system_file.matrices or [], start=1)]

    rule = None
    if system_file.generator is not None:
        try:
            rule = rule_from_config(system_file.generator)
        except GeneratorError as e:
            raise SystemFileError(str(e)) from e

    dims = system_file.dims
    if dims is not None:
        if any(d < 1 for d in dims):
            raise SystemValidationError("dims 中的维数必须 >= 1")
        if rule is None and len(dims) != len(matrices) + 1:
            raise SystemValidationError(
                f"dims 长度 {len(dims)} 应等于矩阵个数加一 ({len(matrices) + 1})")
        for stage, matrix in enumerate(matrices, start=1):
            expected = (dims[stage - 1], dims[stage]) if stage < len(dims) else None
            if expected is not None and matrix.shape != expected:
                raise SystemValidationError(
                    f"阶段 {stage} 形状不匹配: 矩阵为 {matrix.rows}x{matrix.cols}，"
                    f"dims 要求 {expected[0]}x{expected[1]}", stage=stage)

    try:
        system = InverseConeSystem(matrices, rule)
    except GeneratorError as e:
        raise SystemFileError(str(e))

    if dims is not None and rule is not None:
        for stage in range(len(matrices) + 1, len(dims)):
            matrix = system.transition(stage)
            if matrix.shape != (dims[stage - 1], dims[stage]):
                raise SystemValidationError(
                    f"阶段 {stage} 形状不匹配: 生成规则给出 {matrix.rows}x{matrix.cols}，"
                    f"dims 要求 {dims[stage - 1]}x{dims[stage]}", stage=stage)

    logger.debug(f"系统校验通过: {system.describe()}")
    return system


def system_from_dims(dims: Sequence[int], matrices: Sequence) -> InverseConeSystem:
    """便捷入口：用 dims 与矩阵列表构造并校验系统"""
    return validate_system({'dims': list(dims), 'matrices': [as_matrix(m).to_strings() for m in matrices]})
