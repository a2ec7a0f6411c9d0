"""
输入描述模块

负责系统文件与矩阵文件的结构校验，包括:
1. 矩阵项只接受 JSON 整数或 "p/q" 字符串（拒绝浮点数与布尔值）
2. 生成规则描述 GeneratorSpec，字段随 kind 而定
3. 系统文件 SystemFile，未知字段一律拒绝
4. 矩阵文件：单个矩阵或矩阵数组

这里只管形状与类型；有理数解析、非负性与维数衔接由 cone_core 负责。
"""

from typing import Annotated, List, Literal, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    StrictInt,
    StrictStr,
    TypeAdapter,
    ValidationError,
    model_validator,
)

RationalEntry = Union[StrictInt, StrictStr]
MatrixRow = Annotated[List[RationalEntry], Field(min_length=1)]
MatrixRows = Annotated[List[MatrixRow], Field(min_length=1)]

GENERATOR_FIELDS = {
    'periodic': {'matrices'},
    'builtin': {'name'},
    'triangular-shift': {'diagonal', 'subdiagonal'},
}


class GeneratorSpec(BaseModel):
    """生成规则描述"""

    model_config = ConfigDict(extra='forbid')

    kind: Literal['periodic', 'builtin', 'triangular-shift']
    matrices: Optional[List[MatrixRows]] = None
    name: Optional[StrictStr] = None
    diagonal: Optional[RationalEntry] = None
    subdiagonal: Optional[RationalEntry] = None

    @model_validator(mode='after')
    def _fields_match_kind(self) -> 'GeneratorSpec':
        stray = self.model_fields_set - {'kind'} - GENERATOR_FIELDS[self.kind]
        if stray:
            raise ValueError(f"生成规则 {self.kind} 含未知字段: {', '.join(sorted(stray))}")
        if self.kind == 'periodic' and not self.matrices:
            raise ValueError("周期规则至少需要一个矩阵")
        if self.kind == 'builtin' and self.name is None:
            raise ValueError("builtin 生成规则缺少 name")
        return self


class SystemFile(BaseModel):
    """系统文件 {"dims": [...], "matrices": [...], "generator": null | {...}}"""

    model_config = ConfigDict(extra='forbid')

    dims: Optional[List[StrictInt]] = None
    matrices: Optional[List[MatrixRows]] = None
    generator: Optional[GeneratorSpec] = None


_MATRIX_FILE = TypeAdapter(Union[MatrixRows, List[MatrixRows]])


def parse_matrix_file(data) -> List[List[List[RationalEntry]]]:
    """把矩阵文件内容统一为矩阵列表

    Args:
        data: 单个矩阵或矩阵数组

    Returns:
        List: 矩阵列表（单个矩阵时长度为 1）
    """
    parsed = _MATRIX_FILE.validate_python(data)
    if parsed and not isinstance(parsed[0][0], list):
        return [parsed]
    return parsed


def describe_validation_error(error: ValidationError) -> str:
    """把 pydantic 的错误列表压成一行，形如 generator.name: Input should be a valid string"""
    parts = []
    for item in error.errors():
        location = '.'.join(str(part) for part in item['loc']) or '<root>'
        parts.append(f"{location}: {item['msg']}")
    return '; '.join(parts)


__all__ = [
    'GeneratorSpec', 'MatrixRows', 'RationalEntry', 'SystemFile', 'ValidationError',
    'describe_validation_error', 'parse_matrix_file',
]
