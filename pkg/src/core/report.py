"""
报告模块

负责把计算结果序列化为确定性的报告，包括:
1. 有理数统一写成 "p/q" 字符串，整数矩阵写成十进制字符串
2. 报告头记录默认参数与本次参数
3. JSON（键排序）与纯文本两种格式
"""

import json
import logging
from dataclasses import asdict, is_dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Sequence

from .. import __version__
from .arc_systems import ArcRealization, dual_tree_is_path, parity_sound
from .builtin_examples import BuiltinExample, FactOutcome
from .cone_core import InverseConeSystem
from .limit_analysis import Certificate
from .matrix import TransitionMatrix, format_rational
from .realization import OddApproximation, PipelineOutput

logger = logging.getLogger(__name__)

TOOL_NAME = 'lamicone'


def to_jsonable(value: Any) -> Any:
    """递归转换为只含 str/int/float/bool/None/list/dict 的结构"""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, TransitionMatrix):
        return value.to_strings()
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    return value


def header(command: str, defaults: Dict[str, Any], parameters: Dict[str, Any]) -> Dict[str, Any]:
    return {
        'tool': TOOL_NAME,
        'version': __version__,
        'command': command,
        'defaults': to_jsonable(defaults),
        'parameters': to_jsonable(parameters),
    }


def certificate_to_dict(certificate: Certificate) -> Dict[str, Any]:
    return to_jsonable({
        'kind': certificate.kind,
        'holds': certificate.holds,
        'horizon': certificate.horizon,
        'computation': certificate.computation,
        'parameters': certificate.parameters,
        'witness': certificate.witness,
        'summary': certificate.summary,
    })


def analysis_report(system: InverseConeSystem, certificates: Sequence[Certificate],
                    head: Dict[str, Any]) -> Dict[str, Any]:
    return {
        'header': head,
        'system': to_jsonable(system.describe()),
        'certificates': [certificate_to_dict(c) for c in certificates],
    }


def approximation_to_dict(approximation: OddApproximation) -> Dict[str, Any]:
    return {
        'K': str(approximation.K),
        'scale': str(approximation.scale),
        'approximation': approximation.approximation.matrix.to_strings(),
        'integer_matrix': approximation.integer_matrix.to_strings(),
        'max_error': format_rational(approximation.max_error),
    }


def pipeline_to_dict(output: PipelineOutput) -> Dict[str, Any]:
    return {
        'stages': len(output.approximations),
        'matrices': [m.to_strings() for m in output.matrices],
        'odd_scales': [str(k) for k in output.odd_scales],
        'scales': [str(s) for s in output.scales],
        'base_scales': [format_rational(s) for s in output.base_scales],
        'schedule': [format_rational(e) for e in output.schedule],
        'distances': [format_rational(d) for d in output.distances],
        'surjectivity_warnings': output.surjectivity_warnings,
    }


def realization_to_dict(realization: ArcRealization) -> Dict[str, Any]:
    return {
        'matrix': realization.matrix.to_strings(),
        'subdivision_sizes': list(realization.path.subdivision_sizes),
        'labels': [list(sequence) for sequence in realization.path.labels],
        'traversal': [
            [{'edge': p.edge, 'position': p.position, 'direction': p.direction} for p in passes]
            for passes in realization.word.arcs
        ],
        'inner_diagram': {'word': list(realization.inner.word), 'tokens': list(realization.inner.labels)},
        'outer_diagram': {'word': list(realization.outer.word), 'tokens': list(realization.outer.labels)},
        'new_regions': realization.new_regions,
        'punctures': list(realization.stage.punctures),
        'parity_sound': parity_sound(realization.path),
        'dual_tree_is_path': dual_tree_is_path(realization),
    }


def example_report(example: BuiltinExample, outcomes: List[FactOutcome],
                   head: Dict[str, Any]) -> Dict[str, Any]:
    return {
        'header': head,
        'example': example.name,
        'annotation': example.annotation,
        'passed': all(o.passed for o in outcomes),
        'facts': [to_jsonable(o) for o in outcomes],
    }


def dumps(report: Dict[str, Any]) -> str:
    """确定性 JSON：键排序、固定缩进、非 ASCII 原样输出"""
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def _text_lines(value: Any, indent: int) -> List[str]:
    pad = '  ' * indent
    lines: List[str] = []
    if isinstance(value, dict):
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)) and item and not _is_flat(item):
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_inline(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and not _is_flat(item):
                lines.append(f"{pad}-")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.append(f"{pad}- {_inline(item)}")
    else:
        lines.append(f"{pad}{_inline(value)}")
    return lines


def _is_flat(value: Any) -> bool:
    if isinstance(value, dict):
        return not value
    if isinstance(value, list):
        return all(not isinstance(v, dict) and (not isinstance(v, list) or _is_flat(v)) for v in value)
    return True


def _inline(value: Any) -> str:
    if isinstance(value, list):
        return '[' + ', '.join(_inline(v) for v in value) + ']'
    if isinstance(value, dict):
        return '{}'
    if value is None:
        return '-'
    return str(value)


def render_text(report: Dict[str, Any]) -> str:
    """纯文本格式：与 JSON 同一份数据，按键排序逐行缩进"""
    return '\n'.join(_text_lines(to_jsonable(report), 0)) + '\n'


def render(report: Dict[str, Any], fmt: str) -> str:
    if fmt == 'text':
        return render_text(report)
    return dumps(report)
