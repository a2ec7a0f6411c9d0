"""
主程序入口

负责命令行界面，包括:
1. analyze: 对系统文件或内置例子签发有限阶段证书
2. approx: 单个列随机矩阵的奇数逼近
3. realize: 奇数逼近流水线，可串接弧系统实现与 SVG 输出
4. example: 运行内置例子的预期事实

退出码: 0 成功（含否定结论）, 1 例子事实未通过, 2 解析错误或未知例子,
3 输入违反不变量, 4 内部不变量被破坏。
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from src.core.arc_systems import (
    ArcRealization,
    MalformedDiagramError,
    MalformedWordError,
    realize_arcs_triangular,
    realize_sequence,
)
from src.core.builtin_examples import BUILTIN_NAMES, UnknownExampleError, builtin, run_example
from src.core.cone_core import InverseConeSystem, SystemFileError, parse_matrix, validate_system
from src.core.config_manager import config_manager
from src.core.generators import GeneratorError
from src.core.limit_analysis import (
    base_exists,
    directedness_check,
    limit_ray_certificate,
    minimality_certificate,
    trivial_limit_certificate,
)
from src.core.log_manager import LogManager
from src.core.matrix import MatrixError, RationalParseError, TransitionMatrix, parse_rational
from src.core.realization import default_schedule, odd_approximate, realize_pipeline
from src.core.report import (
    analysis_report,
    approximation_to_dict,
    example_report,
    header,
    pipeline_to_dict,
    realization_to_dict,
    render,
)
from src.core.schemas import SystemFile, ValidationError, describe_validation_error, parse_matrix_file
from src.core.stage_pool import StagePool
from src.core.svg_renderer import SvgRenderer

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FACT_FAILED = 1
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_INTERNAL = 4

PARSE_ERRORS = (SystemFileError, RationalParseError, json.JSONDecodeError, GeneratorError,
                UnknownExampleError, MalformedWordError, MalformedDiagramError, ValidationError, OSError)


def _defaults() -> Dict[str, Any]:
    return {
        'horizon': config_manager.get('analysis.horizon'),
        'tol': config_manager.get('analysis.tol'),
        'trivial_tol': config_manager.get('analysis.trivial_tol'),
        'stage': config_manager.get('analysis.stage'),
        'eps0': config_manager.get('realization.eps0'),
    }


def _option(value: Any, key: str) -> Any:
    """命令行未给出时取配置值；0 之类的显式值原样保留，交给后续校验"""
    return config_manager.get(key) if value is None else value


def _read_json(path: str) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SystemFileError(f"{path}: 第 {e.lineno} 行第 {e.colno} 列: {e.msg}")
    except OSError as e:
        raise SystemFileError(f"无法读取 {path}: {e}")


def _load_matrices(path: str) -> List[TransitionMatrix]:
    """读取矩阵列表：单个矩阵、矩阵数组，或带 matrices 字段的系统文件"""
    data = _read_json(path)
    try:
        if isinstance(data, dict):
            system_file = SystemFile.model_validate(data)
            if system_file.generator is not None:
                raise SystemFileError(f"{path}: 流水线只接受显式矩阵，不接受生成规则")
            raw_matrices = system_file.matrices or []
        else:
            raw_matrices = parse_matrix_file(data)
    except ValidationError as e:
        raise SystemFileError(f"{path}: {describe_validation_error(e)}") from e
    return [parse_matrix(raw, f"{path}[{index}]") for index, raw in enumerate(raw_matrices)]


def _load_system(source: str) -> InverseConeSystem:
    if not os.path.exists(source) and source in BUILTIN_NAMES:
        return builtin(source).system
    if not os.path.exists(source):
        raise SystemFileError(f"{source} 既不是文件也不是内置例子，可选内置例子: {', '.join(BUILTIN_NAMES)}")
    return validate_system(_read_json(source))


def _emit(report: Dict[str, Any], args: argparse.Namespace):
    text = render(report, args.format)
    if getattr(args, 'output', None):
        with open(args.output, 'w', encoding='utf-8') as f:
            f.write(text)
        logger.info(f"报告已写入 {args.output}")
    else:
        sys.stdout.write(text)


def cmd_analyze(args: argparse.Namespace) -> int:
    """对系统签发全部有限阶段证书"""
    system = _load_system(args.source)
    horizon = _option(args.horizon, 'analysis.horizon')
    tol = parse_rational(_option(args.tol, 'analysis.tol'))
    trivial_tol = parse_rational(_option(args.trivial_tol, 'analysis.trivial_tol'))
    stage = _option(args.stage, 'analysis.stage')

    certificates = [
        base_exists(system, horizon),
        directedness_check(system, horizon),
        limit_ray_certificate(system, stage, horizon, tol),
        trivial_limit_certificate(system, max(stage, 2), horizon, trivial_tol),
        minimality_certificate(system, stage, horizon),
    ]
    params = {'source': args.source, 'horizon': horizon, 'tol': tol,
              'trivial_tol': trivial_tol, 'stage': stage}
    _emit(analysis_report(system, certificates, header('analyze', _defaults(), params)), args)
    return EXIT_OK


def cmd_approx(args: argparse.Namespace) -> int:
    """单个矩阵的奇数逼近"""
    matrices = _load_matrices(args.file)
    if len(matrices) != 1:
        raise SystemFileError(f"{args.file} 应只含一个矩阵，实际 {len(matrices)} 个")
    eps = parse_rational(_option(args.eps, 'realization.eps0'))
    approximation = odd_approximate(matrices[0], eps)
    report = {
        'header': header('approx', _defaults(), {'file': args.file, 'eps': eps}),
        'approximation': approximation_to_dict(approximation),
    }
    _emit(report, args)
    return EXIT_OK


def _schedule(args: argparse.Namespace, count: int):
    if args.eps_schedule:
        return [parse_rational(item.strip()) for item in args.eps_schedule.split(',') if item.strip()]
    return default_schedule(count, _option(args.eps0, 'realization.eps0'))


def cmd_realize(args: argparse.Namespace) -> int:
    """奇数逼近流水线与弧系统实现"""
    report: Dict[str, Any] = {}
    params: Dict[str, Any] = {'file': args.file, 'arcs': args.arcs, 'arcs_only': args.arcs_only,
                              'triangular': args.triangular}
    realizations: List[ArcRealization] = []
    prefix = 'stage'

    with StagePool() as pool:
        if args.triangular is not None:
            if args.triangular < 1:
                raise ValueError(f"--triangular 必须 >= 1: {args.triangular}")
            prefix = 'triangular'
            realizations = pool.map(realize_arcs_triangular, list(range(1, args.triangular + 1)))
        elif args.file is None:
            raise SystemFileError("缺少输入文件（或使用 --triangular N）")
        elif args.arcs_only:
            realizations = realize_sequence(_load_matrices(args.file))
        else:
            stages = _load_matrices(args.file)
            schedule = _schedule(args, len(stages))
            params['schedule'] = schedule
            output = realize_pipeline(stages, schedule, pool=pool)
            report['pipeline'] = pipeline_to_dict(output)
            if args.arcs:
                realizations = realize_sequence(output.matrices)

        if realizations:
            report['arcs'] = [realization_to_dict(r) for r in realizations]
        if args.svg and realizations:
            report['svg'] = SvgRenderer().write_stages(realizations, args.svg, prefix, pool=pool)

    report['header'] = header('realize', _defaults(), params)
    _emit(report, args)
    return EXIT_OK


def cmd_example(args: argparse.Namespace) -> int:
    """运行内置例子的预期事实，任何一条失败时返回 1"""
    if not args.name:
        sys.stdout.write('\n'.join(BUILTIN_NAMES) + '\n')
        return EXIT_OK
    example, outcomes = run_example(args.name)
    report = example_report(example, outcomes, header('example', _defaults(), {'name': args.name}))
    _emit(report, args)
    return EXIT_OK if report['passed'] else EXIT_FACT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='lamicone',
        description='正卦限锥逆系统的精确有理计算：证书、奇数逼近与弧系统实现',
    )
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        help='覆盖 logging.level')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=['json', 'text'], default='json', help='报告格式')
    common.add_argument('-o', '--output', help='报告输出文件，默认 stdout')

    subparsers = parser.add_subparsers(dest='command', help='可用命令')

    analyze_parser = subparsers.add_parser('analyze', parents=[common], help='签发有限阶段证书')
    analyze_parser.add_argument('source', help='系统 JSON 文件或内置例子名称')
    analyze_parser.add_argument('--horizon', type=int, help='最远阶段，默认 analysis.horizon')
    analyze_parser.add_argument('--tol', help='射影塌缩容差 p/q，默认 analysis.tol')
    analyze_parser.add_argument('--trivial-tol', dest='trivial_tol', help='平凡极限容差 p/q')
    analyze_parser.add_argument('--stage', type=int, help='起始阶段 n')

    approx_parser = subparsers.add_parser('approx', parents=[common], help='列随机矩阵的奇数逼近')
    approx_parser.add_argument('file', help='矩阵 JSON 文件')
    approx_parser.add_argument('--eps', help='误差上界 p/q，默认 realization.eps0')

    realize_parser = subparsers.add_parser('realize', parents=[common], help='奇数逼近流水线与弧系统实现')
    realize_parser.add_argument('file', nargs='?', help='列随机矩阵序列（--arcs-only 时为正奇数矩阵序列）')
    realize_parser.add_argument('--eps-schedule', dest='eps_schedule', help='逗号分隔的 eps_n')
    realize_parser.add_argument('--eps0', help='几何误差序列的首项系数，默认 realization.eps0')
    realize_parser.add_argument('--arcs', action='store_true', help='把每个阶段的奇数矩阵实现为弧系统')
    realize_parser.add_argument('--arcs-only', dest='arcs_only', action='store_true',
                                help='输入已是正奇数矩阵，直接实现弧系统')
    realize_parser.add_argument('--triangular', type=int, metavar='N',
                                help='零测度构造的第 1..N 级弧系统')
    realize_parser.add_argument('--svg', help='SVG 输出目录，每个阶段一个文件')

    example_parser = subparsers.add_parser('example', parents=[common], help='运行内置例子的预期事实')
    example_parser.add_argument('name', nargs='?', help='例子名称，省略时列出全部')

    return parser


COMMANDS = {
    'analyze': cmd_analyze,
    'approx': cmd_approx,
    'realize': cmd_realize,
    'example': cmd_example,
}


def run_command(args: argparse.Namespace) -> int:
    """执行命令并把异常映射为退出码"""
    try:
        return COMMANDS[args.command](args)
    except ArithmeticError as e:
        logger.error(f"内部不变量被破坏: {e}")
        print(f"内部错误: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except PARSE_ERRORS as e:
        logger.error(f"解析失败: {e}")
        print(f"解析错误: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, MatrixError) as e:
        logger.error(f"输入违反约束: {e}")
        print(f"输入错误: {e}", file=sys.stderr)
        return EXIT_INVALID


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if config_manager.load_error:
        print(f"配置错误: {config_manager.load_error}", file=sys.stderr)
        return EXIT_INVALID

    log_manager = LogManager()
    if args.log_level:
        log_manager.set_level(args.log_level)

    if args.command not in COMMANDS:
        parser.print_help()
        return EXIT_OK
    return run_command(args)


if __name__ == '__main__':
    raise SystemExit(main(sys.argv[1:]))
