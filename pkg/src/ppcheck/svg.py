"""Deterministic SVG 1.1 output for :class:`~ppcheck.plotspec.PlotSpec`.

Coordinates are written with six decimals and nothing time- or
environment-dependent is emitted, so one spec always gives the same bytes.
Several specs render as panels side by side.
"""

from __future__ import annotations

from typing import Sequence, Union
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .data import atomic_write_text
from .plotspec import Layer, PlotSpec, linear_ticks, sqrt_ticks

MARGIN = {"left": 62.0, "right": 18.0, "top": 34.0, "bottom": 46.0}
COLORS = {
    "observed": "#1b3a6b",
    "predictive": "#8db4e2",
    "band": "#c9d6e6",
    "reference": "#6b6b6b",
    "overflow": "#d0892b",
    "flag": "#c0392b",
}
FONT = 'font-family="DejaVu Sans, Arial, sans-serif"'


def fmt(v: float) -> str:
    s = f"{float(v):.6f}"
    return "0.000000" if s == "-0.000000" else s


class _Frame:
    """Maps data coordinates of one panel to pixels."""

    def __init__(self, spec: PlotSpec, x_off: float):
        (self.x0, self.x1), (self.y0, self.y1) = spec.limits()
        self.left = x_off + MARGIN["left"]
        self.right = x_off + spec.width - MARGIN["right"]
        self.top = MARGIN["top"]
        self.bottom = spec.height - MARGIN["bottom"]
        self.sx = (self.right - self.left) / (self.x1 - self.x0)
        self.sy = (self.bottom - self.top) / (self.y1 - self.y0)

    def px(self, x):
        return self.left + (np.asarray(x, dtype=float) - self.x0) * self.sx

    def py(self, y):
        return self.bottom - (np.asarray(y, dtype=float) - self.y0) * self.sy


def _color(layer: Layer) -> str:
    return COLORS.get(layer.role, COLORS["observed"])


def _points_attr(xs, ys) -> str:
    return " ".join(f"{fmt(a)},{fmt(b)}" for a, b in zip(xs, ys))


def _layer_svg(layer: Layer, f: _Frame) -> list[str]:
    d, c = layer.data, _color(layer)
    flags = layer.flags if layer.flags is not None else np.zeros(layer.size, dtype=bool)
    out = []
    if layer.kind == "bars":
        xa, xb = f.px(np.minimum(d["x0"], d["x1"])), f.px(np.maximum(d["x0"], d["x1"]))
        ya, yb = f.py(np.maximum(d["y0"], d["y1"])), f.py(np.minimum(d["y0"], d["y1"]))
        opacity = "0.55" if layer.role == "observed" else "0.8"
        for a, b, t, u in zip(xa, xb, ya, yb):
            out.append(
                f'<rect x="{fmt(a)}" y="{fmt(t)}" width="{fmt(b - a)}" height="{fmt(u - t)}" '
                f'fill="{c}" fill-opacity="{opacity}" stroke="{c}" stroke-width="0.5"/>'
            )
    elif layer.kind in ("lines", "steps"):
        x, y = d["x"], d["y"]
        if layer.kind == "steps" and x.size:
            x, y = np.repeat(x, 2)[1:], np.repeat(y, 2)[:-1]
        width = "1.8" if layer.role == "observed" else "1"
        dash = ' stroke-dasharray="4,3"' if layer.role == "reference" else ""
        out.append(
            f'<polyline points="{_points_attr(f.px(x), f.py(y))}" fill="none" stroke="{c}" '
            f'stroke-width="{width}"{dash}/>'
        )
    elif layer.kind == "points":
        for x, y, fl in zip(f.px(d["x"]), f.py(d["y"]), flags):
            col = COLORS["flag"] if fl else c
            out.append(f'<circle cx="{fmt(x)}" cy="{fmt(y)}" r="3.000000" fill="{col}"/>')
    elif layer.kind == "intervals":
        for x, lo, hi, fl in zip(f.px(d["x"]), f.py(d["lo"]), f.py(d["hi"]), flags):
            col = COLORS["flag"] if fl else c
            out.append(
                f'<line x1="{fmt(x)}" y1="{fmt(lo)}" x2="{fmt(x)}" y2="{fmt(hi)}" stroke="{col}" stroke-width="2"/>'
            )
    elif layer.kind == "ribbons":
        xs = f.px(d["x"])
        pts = _points_attr(np.concatenate([xs, xs[::-1]]), np.concatenate([f.py(d["hi"]), f.py(d["lo"])[::-1]]))
        out.append(f'<polygon points="{pts}" fill="{c}" fill-opacity="0.6" stroke="none"/>')
    elif layer.kind == "dots":
        for x, y, r in zip(f.px(d["x"]), f.py(d["y"]), d["r"]):
            out.append(
                f'<ellipse cx="{fmt(x)}" cy="{fmt(y)}" rx="{fmt(r * f.sx)}" ry="{fmt(r * f.sy)}" '
                f'fill="{c}" fill-opacity="0.85" stroke="white" stroke-width="0.3"/>'
            )
    elif layer.kind == "hlines":
        for y in f.py(d["y"]):
            out.append(
                f'<line x1="{fmt(f.left)}" y1="{fmt(y)}" x2="{fmt(f.right)}" y2="{fmt(y)}" '
                f'stroke="{c}" stroke-width="0.8" stroke-dasharray="4,3"/>'
            )
    return out


def _axes_svg(spec: PlotSpec, f: _Frame) -> list[str]:
    out = [
        f'<line x1="{fmt(f.left)}" y1="{fmt(f.bottom)}" x2="{fmt(f.right)}" y2="{fmt(f.bottom)}" stroke="black"/>',
        f'<line x1="{fmt(f.left)}" y1="{fmt(f.top)}" x2="{fmt(f.left)}" y2="{fmt(f.bottom)}" stroke="black"/>',
    ]
    xt, xl = linear_ticks(f.x0, f.x1)
    for v, lab in zip(f.px(xt), xl):
        out.append(f'<line x1="{fmt(v)}" y1="{fmt(f.bottom)}" x2="{fmt(v)}" y2="{fmt(f.bottom + 4)}" stroke="black"/>')
        out.append(f'<text x="{fmt(v)}" y="{fmt(f.bottom + 16)}" font-size="10" text-anchor="middle" {FONT}>{escape(lab)}</text>')
    if spec.y_scale == "sqrt_labels":
        yt, yl = sqrt_ticks(f.y0, f.y1)
    else:
        yt, yl = linear_ticks(f.y0, f.y1)
    for v, lab in zip(f.py(yt), yl):
        out.append(f'<line x1="{fmt(f.left - 4)}" y1="{fmt(v)}" x2="{fmt(f.left)}" y2="{fmt(v)}" stroke="black"/>')
        out.append(
            f'<text x="{fmt(f.left - 7)}" y="{fmt(v + 3.5)}" font-size="10" text-anchor="end" {FONT}>{escape(lab)}</text>'
        )
    mid_x = (f.left + f.right) / 2.0
    mid_y = (f.top + f.bottom) / 2.0
    out.append(f'<text x="{fmt(mid_x)}" y="{fmt(f.bottom + 34)}" font-size="11" text-anchor="middle" {FONT}>{escape(spec.xlabel)}</text>')
    out.append(
        f'<text x="{fmt(f.left - 46)}" y="{fmt(mid_y)}" font-size="11" text-anchor="middle" '
        f'transform="rotate(-90 {fmt(f.left - 46)} {fmt(mid_y)})" {FONT}>{escape(spec.ylabel)}</text>'
    )
    out.append(f'<text x="{fmt(mid_x)}" y="{fmt(f.top - 14)}" font-size="12" text-anchor="middle" {FONT}>{escape(spec.title)}</text>')
    return out


def svg_document(specs: Union[PlotSpec, Sequence[PlotSpec]]) -> str:
    """SVG text for one panel or a row of panels."""
    panels = [specs] if isinstance(specs, PlotSpec) else list(specs)
    if not panels:
        panels = [PlotSpec()]
    width = sum(p.width for p in panels)
    height = max(p.height for p in panels)
    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    x_off = 0.0
    for i, spec in enumerate(panels):
        f = _Frame(spec, x_off)
        clip = f"clip{i}"
        lines.append(
            f'<defs><clipPath id="{clip}"><rect x="{fmt(f.left)}" y="{fmt(f.top)}" '
            f'width="{fmt(f.right - f.left)}" height="{fmt(f.bottom - f.top)}"/></clipPath></defs>'
        )
        lines.append(f"<g id={quoteattr(f'panel{i}')}>")
        lines.append(f'<g clip-path="url(#{clip})">')
        for layer in spec.layers:
            lines.extend(_layer_svg(layer, f))
        lines.append("</g>")
        lines.extend(_axes_svg(spec, f))
        lines.append("</g>")
        x_off += spec.width
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_svg(specs: Union[PlotSpec, Sequence[PlotSpec]], path) -> None:
    """Write :func:`svg_document` of ``specs`` to ``path`` atomically."""
    atomic_write_text(path, svg_document(specs))
