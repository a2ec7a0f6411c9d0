"""
弧系统模块

负责把转移矩阵组合地实现为嵌套穿孔圆盘上的弧系统，包括:
1. 对偶路径的细分与交替标号
2. 新弧的穿越序列（方向严格交替）
3. 内部圆盘与外环两张弦图及其不相交检查
4. 诱导矩阵、对偶树为路径的检查与穿孔计数

平面模型：U 的边界上，上侧依次为 T_0..T_{N-1}（自左向右），下侧为 B_{N-1}..B_0
（自右向左）；第 g 条子边上的一次穿越在 U 内是弦 (T_g, B_g)。外环沿 v_0 一侧的
径向线切开成矩形，外边界依次放下侧尾端（自左向右）、空弧、上侧尾端（自右向左）。
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .generators import TriangularShiftRule
from .matrix import TransitionMatrix, as_matrix

logger = logging.getLogger(__name__)

DOWN = 'down'
UP = 'up'


class ArcSystemError(ValueError):
    """弧系统输入非法"""


class MalformedWordError(ValueError):
    """穿越序列格式错误"""


class MalformedDiagramError(ValueError):
    """弦图匹配格式错误"""


class RoundTripError(ArithmeticError):
    """构造结果违反内部不变量"""


@dataclass(frozen=True)
class ArcSystemStage:
    """穿孔圆盘上的弧系统

    对偶树是路径 R_0 - R_1 - ... - R_r，弧 l_i 分隔 R_{i-1} 与 R_i；
    punctures[k] 是区域 R_k 内的穿孔数。
    """

    arc_count: int
    punctures: Tuple[int, ...]

    def __post_init__(self):
        if self.arc_count < 1:
            raise ArcSystemError("弧的条数必须 >= 1")
        if len(self.punctures) != self.arc_count + 1:
            raise ArcSystemError(f"需要 {self.arc_count + 1} 个区域的穿孔数，实际 {len(self.punctures)} 个")

    @classmethod
    def initial(cls, arc_count: int) -> 'ArcSystemStage':
        """每个互补区域放一个穿孔的初始弧系统"""
        return cls(arc_count, (1,) * (arc_count + 1))

    @property
    def pairwise_non_homotopic(self) -> bool:
        # 每个区域都有穿孔时，相邻弧之间与两端都不是空矩形
        return all(c >= 1 for c in self.punctures)


@dataclass(frozen=True)
class SubEdge:
    index: int
    edge: int
    position: int
    labels: Tuple[int, int]

    @property
    def low(self) -> int:
        return min(self.labels)


@dataclass(frozen=True)
class LabeledPath:
    """细分后的对偶路径，labels[i-1] 是边 e_i 上按路径方向的顶点标号"""

    labels: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        previous_end: Optional[int] = None
        for i, sequence in enumerate(self.labels, start=1):
            if len(sequence) < 2:
                raise ArcSystemError(f"边 e_{i} 至少要有一条子边")
            if previous_end is not None and sequence[0] != previous_end:
                raise ArcSystemError(f"边 e_{i} 的起点标号 {sequence[0]} 与上一条边终点 {previous_end} 不一致")
            for a, b in zip(sequence, sequence[1:]):
                if abs(a - b) != 1:
                    raise ArcSystemError(f"边 e_{i} 上相邻标号 {a}, {b} 相差不为 1")
            previous_end = sequence[-1]

    @property
    def subdivision_sizes(self) -> Tuple[int, ...]:
        return tuple(len(sequence) - 1 for sequence in self.labels)

    def vertex_labels(self) -> List[int]:
        """整条路径上的顶点标号，长度为子边总数加一"""
        result = [self.labels[0][0]]
        for sequence in self.labels:
            result.extend(sequence[1:])
        return result

    def original_vertices(self) -> List[int]:
        """原路径顶点 v_0..v_r 在细分路径中的下标"""
        positions = [0]
        for size in self.subdivision_sizes:
            positions.append(positions[-1] + size)
        return positions

    def sub_edges(self) -> List[SubEdge]:
        edges = []
        for i, sequence in enumerate(self.labels, start=1):
            for k in range(len(sequence) - 1):
                edges.append(SubEdge(len(edges), i, k + 1, (sequence[k], sequence[k + 1])))
        return edges

    def count(self, edge: int, low: int) -> int:
        """边 e_edge 上端点标号为 {low, low+1} 的子边数"""
        sequence = self.labels[edge - 1]
        return sum(1 for a, b in zip(sequence, sequence[1:]) if min(a, b) == low)


@dataclass(frozen=True)
class Pass:
    """一次穿越：穿过边 e_edge 的第 position 条子边"""

    edge: int
    position: int
    direction: str
    sub_edge: int = -1


@dataclass(frozen=True)
class TraversalWord:
    """arcs[j-1] 是新弧 l_j 依次穿越 U 的记录"""

    arcs: Tuple[Tuple[Pass, ...], ...]


@dataclass(frozen=True)
class ChordDiagram:
    """圆周上的弦图

    word[p] 是位置 p 处端点所属弦的名字，每个名字恰好出现两次；
    labels[p] 是该端点在边界上的记号。
    """

    word: Tuple[str, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        counts: Dict[str, int] = {}
        for name in self.word:
            counts[name] = counts.get(name, 0) + 1
        bad = sorted(name for name, c in counts.items() if c != 2)
        if bad:
            raise MalformedDiagramError(f"弦 {', '.join(bad)} 的端点数不是 2")
        if self.labels and len(self.labels) != len(self.word):
            raise MalformedDiagramError("端点记号数量与弦图长度不一致")

    @classmethod
    def from_string(cls, text: str) -> 'ChordDiagram':
        return cls(tuple(text.split()))

    def endpoints(self) -> Dict[str, Tuple[int, int]]:
        seen: Dict[str, List[int]] = {}
        for position, name in enumerate(self.word):
            seen.setdefault(name, []).append(position)
        return {name: (pos[0], pos[1]) for name, pos in seen.items()}


@dataclass(frozen=True)
class NoncrossingResult:
    ok: bool
    pair: Optional[Tuple[str, str]] = None


def check_noncrossing(diagram: ChordDiagram) -> NoncrossingResult:
    """栈式检查弦是否两两不交错

    Args:
        diagram: 弦图

    Returns:
        NoncrossingResult: ok 为 True 表示不相交；否则 pair 给出第一对交错的弦
    """
    stack: List[str] = []
    opened = set()
    for name in diagram.word:
        if name not in opened:
            opened.add(name)
            stack.append(name)
        elif stack[-1] == name:
            stack.pop()
        else:
            return NoncrossingResult(False, (name, stack[-1]))
    return NoncrossingResult(True)


def segment_regions(diagram: ChordDiagram) -> List[int]:
    """不相交弦图中每段边界（位置 p 与 p+1 之间）所属区域的编号

    第 len-1 段是首尾相接的那一段，属于区域 0。
    """
    regions: List[int] = []
    stack = [0]
    opened = set()
    next_region = 1
    for name in diagram.word:
        if name not in opened:
            opened.add(name)
            stack.append(next_region)
            next_region += 1
        else:
            stack.pop()
        regions.append(stack[-1])
    return regions


def induced_matrix(word: TraversalWord, r: int, s: int) -> TransitionMatrix:
    """由穿越序列得到诱导矩阵，(i, j) 项为 l_j 穿越 e_i 各子边的次数

    Args:
        word: 穿越序列
        r: 旧弧条数
        s: 新弧条数

    Returns:
        TransitionMatrix: r x s 非负整数矩阵
    """
    if len(word.arcs) != s:
        raise MalformedWordError(f"穿越序列含 {len(word.arcs)} 条弧，应为 {s}")
    counts = [[0] * s for _ in range(r)]
    for j, passes in enumerate(word.arcs):
        for k, step in enumerate(passes):
            if not 1 <= step.edge <= r:
                raise MalformedWordError(f"弧 l_{j + 1} 的第 {k + 1} 次穿越指向不存在的边 e_{step.edge}")
            if step.direction not in (DOWN, UP):
                raise MalformedWordError(f"未知的穿越方向: {step.direction}")
            if k and step.direction == passes[k - 1].direction:
                raise MalformedWordError(f"弧 l_{j + 1} 的第 {k} 与第 {k + 1} 次穿越方向相同")
            counts[step.edge - 1][j] += 1
    return TransitionMatrix(counts)


def odd_labels(matrix: TransitionMatrix) -> LabeledPath:
    """奇数矩阵的交替标号：奇数号边自 1 升到 s+1，偶数号边自 s+1 降到 1"""
    r, s = matrix.shape
    labels = []
    for i in range(r):
        row = [int(x) for x in matrix.row(i)]
        if i % 2 == 0:
            sequence = [1]
            for j in range(s):
                for _ in range(row[j]):
                    sequence.append(j + 2 if sequence[-1] == j + 1 else j + 1)
        else:
            sequence = [s + 1]
            for j in reversed(range(s)):
                for _ in range(row[j]):
                    sequence.append(j + 1 if sequence[-1] == j + 2 else j + 2)
        labels.append(tuple(sequence))
    return LabeledPath(tuple(labels))


def triangular_labels(n: int) -> LabeledPath:
    """边 e_i 细分为 2i-1 条子边，标号 i, i-1, ..., 1, 2, ..., i, i+1"""
    labels = []
    for i in range(1, n + 1):
        labels.append(tuple(range(i, 0, -1)) + tuple(range(2, i + 2)))
    return LabeledPath(tuple(labels))


def parity_sound(path: LabeledPath) -> bool:
    """任意两条相邻的 {j,j+1} 子边之间，{j+1,j+2} 子边的数目为偶数"""
    edges = path.sub_edges()
    top = max(path.vertex_labels())
    for j in range(1, top):
        positions = [e.index for e in edges if e.low == j]
        for a, b in zip(positions, positions[1:]):
            between = sum(1 for e in edges[a + 1:b] if e.low == j + 1)
            if between % 2:
                return False
    return True


@dataclass
class ArcRealization:
    """一次弧系统实现的全部组合数据"""

    matrix: TransitionMatrix
    source: ArcSystemStage
    path: LabeledPath
    word: TraversalWord
    inner: ChordDiagram
    outer: ChordDiagram
    stage: ArcSystemStage
    chord_arcs: Dict[str, int] = field(default_factory=dict)
    region_sides: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    outer_regions: List[int] = field(default_factory=list)
    new_regions: int = 0


def _route(path: LabeledPath, s: int) -> TraversalWord:
    """l_j 按路径顺序穿过所有 {j,j+1} 子边，方向交替，第一次向下"""
    arcs: List[List[Pass]] = [[] for _ in range(s)]
    for edge in path.sub_edges():
        j = edge.low
        if not 1 <= j <= s:
            raise RoundTripError(f"子边 {edge.index} 的标号 {edge.labels} 超出 1..{s + 1}")
        direction = DOWN if len(arcs[j - 1]) % 2 == 0 else UP
        arcs[j - 1].append(Pass(edge.edge, edge.position, direction, edge.index))
    return TraversalWord(tuple(tuple(passes) for passes in arcs))


def _diagrams(word: TraversalWord, total: int):
    """构造 U 内与外环中的两张弦图"""
    inner_tokens = [('T', g) for g in range(total)] + [('B', g) for g in reversed(range(total))]
    inner_names: Dict[Tuple[str, int], str] = {}
    outer_names: Dict[Tuple[str, int], str] = {}
    chord_arcs: Dict[str, int] = {}
    bottom_tails: List[Tuple[int, str]] = []
    top_tails: List[Tuple[int, str]] = []
    empty_arcs: List[str] = []

    for j, passes in enumerate(word.arcs, start=1):
        if not passes:
            name = f"z{j}"
            chord_arcs[name] = j
            empty_arcs.append(name)
            continue
        for k, step in enumerate(passes):
            name = f"p{j}.{k + 1}"
            chord_arcs[name] = j
            inner_names[('T', step.sub_edge)] = name
            inner_names[('B', step.sub_edge)] = name
        for k in range(len(passes) - 1):
            name = f"r{j}.{k + 1}"
            chord_arcs[name] = j
            side = 'B' if passes[k].direction == DOWN else 'T'
            outer_names[(side, passes[k].sub_edge)] = name
            outer_names[(side, passes[k + 1].sub_edge)] = name
        start, end = f"s{j}", f"e{j}"
        chord_arcs[start] = chord_arcs[end] = j
        outer_names[('T', passes[0].sub_edge)] = start
        top_tails.append((passes[0].sub_edge, start))
        last = passes[-1]
        if last.direction == DOWN:
            outer_names[('B', last.sub_edge)] = end
            bottom_tails.append((last.sub_edge, end))
        else:
            outer_names[('T', last.sub_edge)] = end
            top_tails.append((last.sub_edge, end))

    labels = [f"{side}{g}" for side, g in inner_tokens]
    inner = ChordDiagram(tuple(inner_names[t] for t in inner_tokens), tuple(labels))

    outer_word = [outer_names[t] for t in inner_tokens]
    outer_labels = list(labels)
    for g, name in sorted(bottom_tails):
        outer_word.append(name)
        outer_labels.append(f"O{name}")
    for name in empty_arcs:
        outer_word.extend([name, name])
        outer_labels.extend([f"O{name}a", f"O{name}b"])
    for g, name in sorted(top_tails, reverse=True):
        outer_word.append(name)
        outer_labels.append(f"O{name}")
    outer = ChordDiagram(tuple(outer_word), tuple(outer_labels))
    return inner, outer, chord_arcs


def _annulus_regions(outer: ChordDiagram, total: int) -> List[int]:
    """外环的区域：矩形区域编号，再把切口两侧的区域合并"""
    regions = segment_regions(outer)
    cut_side = regions[2 * total - 1]
    wrap_side = regions[-1]
    return [wrap_side if region == cut_side else region for region in regions]


def _segment_vertex(p: int, total: int, length: int) -> Optional[int]:
    """外环边界段 p 若位于 U 的边界上，返回其所在条带的路径顶点"""
    if p < total - 1:
        return p + 1
    if p == total - 1:
        return total
    if p < 2 * total - 1:
        return 2 * total - 1 - p
    if p == 2 * total - 1 or p == length - 1:
        return 0
    return None


def _assemble(matrix: TransitionMatrix, source: ArcSystemStage, path: LabeledPath,
              s: int) -> ArcRealization:
    """穿越、弦图、区域与穿孔；并校验全部不变量"""
    r = source.arc_count
    word = _route(path, s)
    total = sum(path.subdivision_sizes)
    inner, outer, chord_arcs = _diagrams(word, total)

    for name, diagram in (('U', inner), ('V\\U', outer)):
        result = check_noncrossing(diagram)
        if not result.ok:
            raise RoundTripError(f"{name} 中的弦 {result.pair[0]} 与 {result.pair[1]} 交错")

    vertex_labels = path.vertex_labels()
    regions = _annulus_regions(outer, total)
    region_index: Dict[int, int] = {}
    for p, region in enumerate(regions):
        vertex = _segment_vertex(p, total, len(regions))
        if vertex is None:
            continue
        index = vertex_labels[vertex] - 1
        if region_index.setdefault(region, index) != index:
            raise RoundTripError(f"外环区域 {region} 同时落在 R_{region_index[region]} 与 R_{index}")

    endpoints = outer.endpoints()
    for name, (a, b) in endpoints.items():
        if name.startswith('z'):
            region_index.setdefault(regions[a], chord_arcs[name])

    sides: Dict[str, Tuple[int, int]] = {}
    for name, (a, b) in endpoints.items():
        inside = region_index.get(regions[a])
        outside = region_index.get(regions[a - 1] if a else regions[-1])
        j = chord_arcs[name]
        if inside is None or outside is None or {inside, outside} != {j - 1, j}:
            raise RoundTripError(f"弦 {name} 两侧的区域 ({inside}, {outside}) 不是 R_{j - 1} 与 R_{j}")
        sides[name] = (min(inside, outside), max(inside, outside))

    punctures = [0] * (s + 1)
    for i, vertex in enumerate(path.original_vertices()):
        punctures[vertex_labels[vertex] - 1] += source.punctures[i]
    distinct = sorted(set(regions))
    for region in distinct:
        punctures[region_index[region]] += 1
    stage = ArcSystemStage(s, tuple(punctures))

    induced = induced_matrix(word, r, s)
    if induced != matrix:
        raise RoundTripError(f"诱导矩阵 {induced.to_strings()} 与输入 {matrix.to_strings()} 不一致")
    if not stage.pairwise_non_homotopic:
        raise RoundTripError(f"新弧系统存在没有穿孔的区域: {stage.punctures}")

    logger.debug(f"弧系统实现完成: r={r}, s={s}, 子边 {total} 条, 新区域 {len(distinct)} 个")
    return ArcRealization(matrix, source, path, word, inner, outer, stage, chord_arcs,
                          sides, regions, len(distinct))


def realize_arcs_odd(stage: ArcSystemStage, matrix) -> ArcRealization:
    """把正奇数矩阵实现为外扩穿孔圆盘 V 上的弧系统

    Args:
        stage: U 上的弧系统，弧数等于矩阵行数
        matrix: r x s 正奇数矩阵

    Returns:
        ArcRealization: 标号路径、穿越序列、两张弦图与 V 上的新弧系统
    """
    matrix = as_matrix(matrix)
    if matrix.rows != stage.arc_count:
        raise ArcSystemError(f"矩阵有 {matrix.rows} 行，但 U 上有 {stage.arc_count} 条弧")
    for i, row in enumerate(matrix.entries, start=1):
        for j, value in enumerate(row, start=1):
            if value.denominator != 1 or value <= 0 or value.numerator % 2 == 0:
                raise ArcSystemError(f"位置 ({i}, {j}) 的项 {value} 不是正奇数")
    return _assemble(matrix, stage, odd_labels(matrix), matrix.cols)


def realize_arcs_triangular(n: int) -> ArcRealization:
    """零测度构造第 n 级：n 条旧弧，l_{n+1} 不进入 U"""
    if n < 1:
        raise ArcSystemError(f"阶段下标必须 >= 1: {n}")
    matrix = TriangularShiftRule(1, 2).matrix(n)
    return _assemble(matrix, ArcSystemStage.initial(n), triangular_labels(n), n + 1)


def dual_tree_is_path(realization: ArcRealization) -> bool:
    """检查每条新弧 l_j 把 l_{j-1} 与 l_{j+1} 分在两侧

    U 内按条带标号判断；外环内每条弦两侧必须恰为 R_{j-1} 与 R_j。
    """
    edges = realization.path.sub_edges()
    s = realization.stage.arc_count
    for j in range(1, s + 1):
        below = [e for e in edges if e.low == j - 1]
        above = [e for e in edges if e.low == j + 1]
        if any(max(e.labels) > j for e in below) or any(e.low < j + 1 for e in above):
            return False
    return all(sides == (realization.chord_arcs[name] - 1, realization.chord_arcs[name])
               for name, sides in realization.region_sides.items())


def realize_sequence(matrices: Sequence) -> List[ArcRealization]:
    """逐阶段实现一串正奇数矩阵，阶段 n 的 V 作为阶段 n+1 的 U"""
    matrices = [as_matrix(m) for m in matrices]
    if not matrices:
        raise ArcSystemError("至少需要一个矩阵")
    results = []
    stage = ArcSystemStage.initial(matrices[0].rows)
    for matrix in matrices:
        realization = realize_arcs_odd(stage, matrix)
        results.append(realization)
        stage = realization.stage
    return results
