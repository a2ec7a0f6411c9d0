"""
SVG 渲染模块

负责把弧系统实现画成弦图，包括:
1. 内圆为 ∂U，外圆为 ∂V；U 内的穿越画成竖直弦
2. 外环中的回转画成圆弧，尾端画成径向线段，空弧贴着 ∂V
3. 旧穿孔画在对偶路径上，外环每个新区域一个实心点

输出只用于展示，不参与任何数据往返。
"""

import math
import os
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from jinja2 import Environment, FileSystemLoader

from .arc_systems import ArcRealization
from .config_manager import config_manager
from .stage_pool import StagePool

logger = logging.getLogger(__name__)

TEMPLATE_NAME = 'chord_diagram.svg.j2'
PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#17becf', '#8c564b', '#e377c2']
PROJECT_TEMPLATES = Path(__file__).resolve().parents[2] / 'templates'


class SvgRenderer:
    """弦图 SVG 渲染器"""

    def __init__(self, template_dir: Optional[str] = None, size: Optional[int] = None):
        """初始化渲染器

        Args:
            template_dir: 模板目录，默认读取 svg.template_dir，找不到时使用项目自带模板
            size: 画布边长（像素），默认读取 svg.size
        """
        configured = template_dir or config_manager.get('svg.template_dir', 'templates')
        self.template_dir = configured if os.path.isdir(configured) else str(PROJECT_TEMPLATES)
        self.size = int(size or config_manager.get('svg.size', 512))

        self.jinja_env = Environment(
            loader=FileSystemLoader(self.template_dir),
            autoescape=True
        )

    def _point(self, radius: float, angle: float) -> Tuple[float, float]:
        center = self.size / 2
        return (round(center + radius * math.cos(angle), 2),
                round(center - radius * math.sin(angle), 2))

    def _layout(self, realization: ArcRealization):
        total = sum(realization.path.subdivision_sizes)
        inner_r = self.size * 0.28
        outer_r = self.size * 0.45

        def top_angle(g: float) -> float:
            return math.pi - math.pi * (g + 1) / (total + 1)

        inner_angles = [top_angle(g) for g in range(total)] + [-top_angle(g) for g in reversed(range(total))]
        outer = realization.outer
        endpoints = outer.endpoints()
        angles: List[float] = list(inner_angles)
        for p in range(2 * total, len(outer.word)):
            name = outer.word[p]
            a, b = endpoints[name]
            if name.startswith('z'):
                angles.append(0.08 if p == a else -0.08)
            else:
                angles.append(inner_angles[a if a < 2 * total else b])
        return total, inner_r, outer_r, top_angle, angles

    def _scene(self, realization: ArcRealization, title: str) -> Dict:
        total, inner_r, outer_r, top_angle, angles = self._layout(realization)
        outer = realization.outer
        colors = {name: PALETTE[(arc - 1) % len(PALETTE)] for name, arc in realization.chord_arcs.items()}

        def position(p: int) -> Tuple[float, float]:
            return self._point(inner_r if p < 2 * total else outer_r, angles[p])

        lines, arcs = [], []
        for name, (a, b) in realization.inner.endpoints().items():
            (x1, y1), (x2, y2) = position(a), position(b)
            lines.append({'x1': x1, 'y1': y1, 'x2': x2, 'y2': y2, 'color': colors[name], 'name': name})

        for name, (a, b) in outer.endpoints().items():
            (x1, y1), (x2, y2) = position(a), position(b)
            inner_a, inner_b = a < 2 * total, b < 2 * total
            if inner_a and inner_b:
                if x1 > x2:
                    x1, y1, x2, y2 = x2, y2, x1, y1
                radius = round(math.hypot(x2 - x1, y2 - y1) / 2, 2)
                sweep = 1 if angles[a] > 0 else 0
                arcs.append({'x1': x1, 'y1': y1, 'x2': x2, 'y2': y2, 'r': radius,
                             'sweep': sweep, 'color': colors[name], 'name': name})
            elif name.startswith('z'):
                radius = round(math.hypot(x2 - x1, y2 - y1), 2)
                arcs.append({'x1': x1, 'y1': y1, 'x2': x2, 'y2': y2, 'r': radius,
                             'sweep': 0, 'color': colors[name], 'name': name})
            else:
                lines.append({'x1': x1, 'y1': y1, 'x2': x2, 'y2': y2, 'color': colors[name], 'name': name})

        dots = []
        center = self.size / 2
        step = 2 * inner_r / (total + 1)
        for i, vertex in enumerate(realization.path.original_vertices()):
            x = round(center - inner_r + step * (vertex + 0.5), 2)
            for k in range(realization.source.punctures[i]):
                dots.append({'x': x, 'y': round(center + 6 * k, 2), 'kind': 'old'})

        placed = set()
        for p, region in enumerate(realization.outer_regions):
            if region in placed:
                continue
            placed.add(region)
            following = (p + 1) % len(angles)
            if p >= len(angles) - 1 or p == 2 * total - 1:
                x, y = self._point((inner_r + outer_r) / 2, math.pi)
            elif p < 2 * total - 1:
                x, y = self._point(inner_r + self.size * 0.03, (angles[p] + angles[following]) / 2)
            else:
                x, y = self._point(outer_r - self.size * 0.03, (angles[p] + angles[following]) / 2)
            dots.append({'x': x, 'y': y, 'kind': 'new'})

        return {
            'title': title,
            'size': self.size,
            'center': center,
            'inner_r': round(inner_r, 2),
            'outer_r': round(outer_r, 2),
            'lines': lines,
            'arcs': arcs,
            'dots': dots,
            'punctures': list(realization.stage.punctures),
        }

    def render(self, realization: ArcRealization, title: str = 'arc system') -> str:
        """渲染为 SVG 文本"""
        template = self.jinja_env.get_template(TEMPLATE_NAME)
        return template.render(**self._scene(realization, title))

    def write(self, realization: ArcRealization, output_file: str, title: str = 'arc system') -> str:
        """渲染并写入文件

        Args:
            realization: 弧系统实现
            output_file: 输出路径，父目录不存在时自动创建
            title: 图标题

        Returns:
            str: 写入的文件路径
        """
        try:
            Path(output_file).parent.mkdir(parents=True, exist_ok=True)
            with open(output_file, 'w', encoding='utf-8') as f:
                f.write(self.render(realization, title))
            logger.info(f"生成弦图: {output_file}")
            return output_file
        except OSError as e:
            logger.error(f"写入弦图失败: {e}")
            raise

    def write_stages(self, realizations: Sequence[ArcRealization], output_dir: str,
                     prefix: str = 'stage', pool: Optional[StagePool] = None) -> List[str]:
        """每个阶段写一个文件 {prefix}_{n}.svg；给出 pool 时并行写入，返回路径按阶段排序"""
        jobs = list(enumerate(realizations, start=1))

        def write_one(job: Tuple[int, ArcRealization]) -> str:
            n, realization = job
            return self.write(realization, os.path.join(output_dir, f"{prefix}_{n}.svg"), f"{prefix} {n}")

        if pool is None:
            return [write_one(job) for job in jobs]
        return pool.map(write_one, jobs)
