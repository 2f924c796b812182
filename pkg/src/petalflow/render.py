"""SVG phase portraits of semigroup generators and their flowers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .errors import PetalflowError
from .flow import trajectory

PETAL_COLORS = ("#c0392b", "#2471a3", "#229954", "#b9770e", "#7d3c98", "#17a589")


@dataclass(frozen=True)
class RenderSpec:
    """Presentation options for :func:`render_phase_portrait`.

    Attributes
    ----------
    grid : int
        Arrows per axis (at least 4).
    image_size : int
        Width and height in pixels (at least 100).
    petal_colors : tuple of str
        Stroke colors, cycled by petal index.
    trajectories : tuple of complex
        Seed points of streamlines.
    time_span : (float, float)
        ``(t_min, t_max)`` for streamlines.
    """

    grid: int = 24
    image_size: int = 800
    petal_colors: tuple = PETAL_COLORS
    trajectories: tuple = ()
    time_span: tuple = (-3.0, 6.0)
    arrow_length: float = field(default=0.0)

    def __post_init__(self):
        if int(self.grid) != self.grid or self.grid < 4:
            raise ValueError("grid must be an integer >= 4")
        if int(self.image_size) != self.image_size or self.image_size < 100:
            raise ValueError("image_size must be an integer >= 100")
        if not self.petal_colors:
            raise ValueError("petal_colors must not be empty")
        if not self.time_span[0] < self.time_span[1]:
            raise ValueError("time_span must be increasing")


def _num(x: float) -> str:
    # fixed precision keeps the output byte-stable
    s = f"{x:.9f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _pt(z: complex) -> str:
    return f"{_num(z.real)},{_num(z.imag)}"


def arrow_field(gen, grid: int, arrow_length: float = 0.0):
    """Anchors, unit directions ``-f/|f|`` and lengths on a ``grid x grid`` lattice.

    Lengths are ``L tanh(2|f|)`` with ``L`` defaulting to 0.8 of the cell size.
    Anchors outside the disk or with ``f = 0`` are dropped.
    """
    xs = np.linspace(-1, 1, grid + 2)[1:-1]
    X, Y = np.meshgrid(xs, xs[::-1])
    z = (X + 1j * Y).ravel()
    z = z[np.abs(z) < 0.98]
    fz = np.asarray(gen.eval(z), dtype=complex)
    mag = np.abs(fz)
    keep = np.isfinite(mag) & (mag > 0)
    z, fz, mag = z[keep], fz[keep], mag[keep]
    L = arrow_length or 0.8 * (xs[1] - xs[0])
    return z, -fz / mag, L * np.tanh(2 * mag)


def _arrow(z, d, length):
    tip = z + d * length
    head = 0.3 * length
    left = tip - head * d * complex(math.cos(0.4), math.sin(0.4))
    right = tip - head * d * complex(math.cos(0.4), -math.sin(0.4))
    return (f'<path class="arrow" d="M{_pt(z)} L{_pt(tip)} M{_pt(left)} '
            f'L{_pt(tip)} L{_pt(right)}"/>')


def _polyline(points) -> str:
    pts = list(points)
    return "M" + " L".join(_pt(complex(p)) for p in pts)


def render_phase_portrait(gen, flower=None, spec: RenderSpec | None = None) -> bytes:
    """SVG document with the unit circle, an arrow grid along ``-f`` and petal outlines.

    Petals whose boundary cannot be traced are left out and reported in a
    ``<desc class="warning">`` element.

    Returns
    -------
    bytes
        UTF-8 encoded SVG, identical for identical inputs.
    """
    spec = spec or RenderSpec()
    size = int(spec.image_size)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        'viewBox="-1.1 -1.1 2.2 2.2">',
        f"<title>{escape(gen.label)}</title>",
        "<style>.arrow{stroke:#555;stroke-width:0.004;fill:none}"
        ".petal{stroke-width:0.008;fill-opacity:0.12}"
        ".disk{stroke:#000;stroke-width:0.006;fill:none}"
        ".stream{stroke:#888;stroke-width:0.004;fill:none}</style>",
        '<g transform="scale(1,-1)">',
        '<circle class="disk" cx="0" cy="0" r="1"/>',
    ]
    z, d, lengths = arrow_field(gen, spec.grid, spec.arrow_length)
    out.append('<g class="field">')
    out.extend(_arrow(complex(a), complex(b), float(c)) for a, b, c in zip(z, d, lengths))
    out.append("</g>")
    warnings = []
    if flower is not None:
        out.append('<g class="flower">')
        for i, petal in enumerate(flower.petals):
            color = spec.petal_colors[i % len(spec.petal_colors)]
            try:
                pts = petal.boundary.points
            except PetalflowError as exc:
                warnings.append(f"petal {i} at angle {petal.eta.angle:.6f} omitted: {exc}")
                continue
            out.append(f'<path class="petal" data-index="{i}" stroke="{color}" fill="{color}" '
                       f'd="{_polyline(pts)} Z"/>')
        out.append("</g>")
    if spec.trajectories:
        out.append('<g class="streams">')
        t0, t1 = spec.time_span
        for z0 in spec.trajectories:
            try:
                tr = trajectory(gen, complex(z0), t0, t1)
            except (PetalflowError, ValueError) as exc:
                warnings.append(f"streamline from {complex(z0)!r} omitted: {exc}")
                continue
            out.append(f'<path class="stream" d="{_polyline(tr.z)}"/>')
        out.append("</g>")
    out.append("</g>")
    for w in warnings:
        out.append(f'<desc class="warning">{escape(w)}</desc>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def count_petal_paths(svg: bytes) -> int:
    """Number of closed ``class="petal"`` paths in a rendered document."""
    text = svg.decode("utf-8")
    return sum(1 for line in text.splitlines()
               if line.startswith('<path class="petal"') and line.rstrip().endswith('Z"/>'))
