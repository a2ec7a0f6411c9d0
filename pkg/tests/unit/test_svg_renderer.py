"""
SVG 渲染单元测试
"""

from pathlib import Path

import pytest

from src.core.arc_systems import ArcSystemStage, realize_arcs_odd, realize_arcs_triangular
from src.core.stage_pool import StagePool
from src.core.svg_renderer import PROJECT_TEMPLATES, SvgRenderer


@pytest.fixture
def renderer():
    return SvgRenderer(size=300)


def test_missing_template_dir_falls_back(tmp_path):
    """测试配置的模板目录不存在时使用项目模板"""
    renderer = SvgRenderer(template_dir=str(tmp_path / 'absent'))
    assert renderer.template_dir == str(PROJECT_TEMPLATES)


def test_render_triangular(renderer):
    """测试渲染零测度构造的一个阶段"""
    realization = realize_arcs_triangular(2)
    svg = renderer.render(realization, title='stage <2>')

    assert svg.startswith('<?xml')
    assert 'width="300"' in svg
    assert '<title>stage &lt;2&gt;</title>' in svg
    chords = (len(realization.inner.word) + len(realization.outer.word)) // 2
    assert svg.count('data-chord=') == chords
    dots = sum(realization.source.punctures) + len(set(realization.outer_regions))
    assert svg.count('r="3"') == dots
    assert 'punctures ' + ' '.join(str(c) for c in realization.stage.punctures) in svg


def test_write_stages(renderer, tmp_path, fig10_matrix):
    """测试逐阶段写出 SVG 文件"""
    realizations = [realize_arcs_odd(ArcSystemStage.initial(3), fig10_matrix), realize_arcs_triangular(1)]
    output_dir = tmp_path / 'svg' / 'nested'

    paths = renderer.write_stages(realizations, str(output_dir))

    assert [Path(p).name for p in paths] == ['stage_1.svg', 'stage_2.svg']
    for path in paths:
        assert Path(path).read_text(encoding='utf-8').rstrip().endswith('</svg>')


def test_write_stages_with_pool(renderer, tmp_path):
    """测试给出任务池时并行写出，路径仍按阶段排序"""
    realizations = [realize_arcs_triangular(n) for n in range(1, 5)]

    with StagePool(max_workers=3) as pool:
        paths = renderer.write_stages(realizations, str(tmp_path / 'svg'), prefix='tri', pool=pool)

    assert [Path(p).name for p in paths] == ['tri_1.svg', 'tri_2.svg', 'tri_3.svg', 'tri_4.svg']
    assert all(Path(p).exists() for p in paths)


def test_write_failure_raises(renderer, tmp_path):
    """测试无法写入时向上抛出"""
    blocker = tmp_path / 'file'
    blocker.write_text('x', encoding='utf-8')

    with pytest.raises(OSError):
        renderer.write(realize_arcs_triangular(1), str(blocker / 'out.svg'))
