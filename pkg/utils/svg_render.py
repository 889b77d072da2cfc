"""
SVG rendering of 2-D fundamental parallelepipeds.
Solid edges meet at the origin vertex, the far edges are dashed, FPD points
are filled and the lattice points on the excluded boundary are hollow.
Output is deterministic: integer pixel coordinates and sorted elements only.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from jinja2 import Environment, StrictUndefined

from utils.config import get_settings
from utils.errors import EmptyListError, UnsupportedDimensionError
from utils.exact_core import inverse_rational
from utils.lattice_fpd import Fpd, fpd_vertices

logger = logging.getLogger(__name__)

_ENV = Environment(autoescape=True, undefined=StrictUndefined, trim_blocks=True, lstrip_blocks=True)

SVG_TEMPLATE = _ENV.from_string(
    """<?xml version="1.0" standalone="no"?>
<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">
<svg width="{{ width }}" height="{{ height }}" viewBox="0 0 {{ width }} {{ height }}" version="1.1" xmlns="http://www.w3.org/2000/svg">
<style>
.grid { stroke: #d0d0d0; stroke-width: 1; }
.axis { stroke: #808080; stroke-width: 1.5; }
.edge-solid { fill: none; stroke: #1f3a93; stroke-width: 2; }
.edge-dashed { fill: none; stroke: #1f3a93; stroke-width: 2; stroke-dasharray: 6,4; }
.fpd-point { fill: #1f3a93; stroke: #1f3a93; }
.boundary-point { fill: #ffffff; stroke: #1f3a93; stroke-width: 1.5; }
.label { font-family: monospace; font-size: 12px; fill: #333333; }
</style>
<rect x="0" y="0" width="{{ width }}" height="{{ height }}" fill="#ffffff"/>
{% for panel in panels %}
<g transform="translate({{ panel.offset }},0)">
{% if show_grid %}
{% for x in panel.grid_x %}
<line class="{{ 'axis' if x.value == 0 else 'grid' }}" x1="{{ x.px }}" y1="{{ panel.top }}" x2="{{ x.px }}" y2="{{ panel.bottom }}"/>
{% endfor %}
{% for y in panel.grid_y %}
<line class="{{ 'axis' if y.value == 0 else 'grid' }}" x1="{{ panel.left }}" y1="{{ y.px }}" x2="{{ panel.right }}" y2="{{ y.px }}"/>
{% endfor %}
{% endif %}
{% for edge in panel.solid_edges %}
<line class="edge-solid" x1="{{ edge[0] }}" y1="{{ edge[1] }}" x2="{{ edge[2] }}" y2="{{ edge[3] }}"/>
{% endfor %}
{% for edge in panel.dashed_edges %}
<line class="edge-dashed" x1="{{ edge[0] }}" y1="{{ edge[1] }}" x2="{{ edge[2] }}" y2="{{ edge[3] }}"/>
{% endfor %}
{% for point in panel.boundary_points %}
<circle class="boundary-point" cx="{{ point.px }}" cy="{{ point.py }}" r="{{ radius }}"><title>{{ point.x }},{{ point.y }}</title></circle>
{% endfor %}
{% for point in panel.fpd_points %}
<circle class="fpd-point" cx="{{ point.px }}" cy="{{ point.py }}" r="{{ radius }}"><title>{{ point.x }},{{ point.y }}</title></circle>
{% endfor %}
{% if panel.label %}
<text class="label" x="{{ panel.left }}" y="{{ panel.bottom + label_gap }}">{{ panel.label }}</text>
{% endif %}
</g>
{% endfor %}
</svg>
"""
)


@dataclass(frozen=True)
class RenderOptions:
    """scale is pixels per lattice unit; margin is in lattice units."""

    scale: Optional[int] = None
    margin: int = 1
    show_grid: bool = True
    radius: int = 4
    panel_gap: int = 20

    @property
    def pixels_per_unit(self) -> int:
        return self.scale if self.scale is not None else get_settings().svg_scale


def _boundary_points(fpd: Fpd) -> List[Tuple[int, int]]:
    """Lattice points of the closed parallelepiped that the half-open FPD excludes."""
    inverse = inverse_rational(fpd.modulus)
    vertices = fpd_vertices(fpd.modulus)
    xs = [v[0] for v in vertices]
    ys = [v[1] for v in vertices]
    excluded = []
    for x in range(min(xs), max(xs) + 1):
        for y in range(min(ys), max(ys) + 1):
            coords = inverse.apply((x, y))
            if all(Fraction(0) <= c <= 1 for c in coords) and any(c == 1 for c in coords):
                excluded.append((x, y))
    return excluded


def _panel(fpd: Fpd, options: RenderOptions, offset: int, label: Optional[str]) -> dict:
    if fpd.modulus.rows != 2 or fpd.modulus.cols != 2:
        raise UnsupportedDimensionError(f"Only 2-D FPDs can be rendered, got {fpd.modulus.rows}-D")

    scale = options.pixels_per_unit
    vertices = fpd_vertices(fpd.modulus)
    x_min = min(v[0] for v in vertices) - options.margin
    x_max = max(v[0] for v in vertices) + options.margin
    y_min = min(v[1] for v in vertices) - options.margin
    y_max = max(v[1] for v in vertices) + options.margin

    def px(x: int) -> int:
        return (x - x_min) * scale

    def py(y: int) -> int:
        return (y_max - y) * scale

    def segment(a, b) -> Tuple[int, int, int, int]:
        return px(a[0]), py(a[1]), px(b[0]), py(b[1])

    # vertices are ordered (0,0), (0,1), (1,0), (1,1) in cube coordinates
    origin, second, first, far = vertices

    return {
        "offset": offset,
        "left": 0,
        "right": px(x_max),
        "top": 0,
        "bottom": py(y_min),
        "grid_x": [{"value": x, "px": px(x)} for x in range(x_min, x_max + 1)],
        "grid_y": [{"value": y, "px": py(y)} for y in range(y_min, y_max + 1)],
        "solid_edges": [segment(origin, first), segment(origin, second)],
        "dashed_edges": [segment(first, far), segment(second, far)],
        "fpd_points": [{"x": x, "y": y, "px": px(x), "py": py(y)} for x, y in fpd.points],
        "boundary_points": [{"x": x, "y": y, "px": px(x), "py": py(y)} for x, y in _boundary_points(fpd)],
        "label": label,
        "width": px(x_max),
        "height": py(y_min),
    }


def render_fpd_panel(
    fpds: Sequence[Fpd], options: Optional[RenderOptions] = None, labels: Optional[Sequence[str]] = None
) -> str:
    """
    Several FPDs side by side in one SVG document.

    Raises:
        UnsupportedDimensionError: any modulus is not 2 x 2
    """
    if not fpds:
        raise EmptyListError("Nothing to render")
    options = options or RenderOptions()
    labels = list(labels) if labels is not None else [None] * len(fpds)
    label_gap = 16 if any(labels) else 0

    panels = []
    offset = 0
    for fpd, label in zip(fpds, labels):
        panel = _panel(fpd, options, offset, label)
        panels.append(panel)
        offset += panel["width"] + options.panel_gap

    width = offset - options.panel_gap
    height = max(panel["height"] for panel in panels) + label_gap + (4 if label_gap else 0)
    logger.debug(f"Rendering {len(panels)} FPD panel(s) at {width}x{height}")
    return SVG_TEMPLATE.render(
        panels=panels,
        width=width,
        height=height,
        show_grid=options.show_grid,
        radius=options.radius,
        label_gap=label_gap,
    )


def render_fpd_svg(fpd: Fpd, options: Optional[RenderOptions] = None, label: Optional[str] = None) -> str:
    """Render one 2-D FPD."""
    return render_fpd_panel([fpd], options, [label] if label else None)
