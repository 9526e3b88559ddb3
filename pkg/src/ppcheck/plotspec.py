"""Backend-neutral plot description consumed by the SVG renderer.

A :class:`PlotSpec` is an ordered list of layers in data coordinates; layer
order is drawing order. Every layer kind has a fixed set of array fields:

``bars``      x0, x1, y0, y1 (axis-aligned rectangles)
``lines``     x, y (one polyline)
``steps``     x, y (post-step polyline; the last y extends to the last x)
``points``    x, y
``intervals`` x, lo, hi (vertical segments)
``ribbons``   x, lo, hi (filled band between two polylines)
``dots``      x, y, r (circles of radius r in x units)
``hlines``    y (horizontal reference lines across the panel)

With ``y_scale="sqrt_labels"`` the y coordinates are already square roots
and tick labels show the squared (untransformed) values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LAYER_FIELDS = {
    "bars": ("x0", "x1", "y0", "y1"),
    "lines": ("x", "y"),
    "steps": ("x", "y"),
    "points": ("x", "y"),
    "intervals": ("x", "lo", "hi"),
    "ribbons": ("x", "lo", "hi"),
    "dots": ("x", "y", "r"),
    "hlines": ("y",),
}
SCALES = ("linear", "sqrt_labels")


@dataclass
class Layer:
    kind: str
    data: dict
    role: str = "observed"
    label: str = ""
    flags: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in LAYER_FIELDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        names = LAYER_FIELDS[self.kind]
        if set(self.data) != set(names):
            raise ValueError(f"{self.kind} layer needs fields {names}, got {sorted(self.data)}")
        arrays = {k: np.asarray(self.data[k], dtype=float).ravel() for k in names}
        sizes = {a.size for a in arrays.values()}
        if len(sizes) != 1:
            raise ValueError(f"{self.kind} layer fields differ in length")
        for k, a in arrays.items():
            if not np.all(np.isfinite(a)):
                raise ValueError(f"non-finite coordinate in {self.kind}.{k}")
        self.data = arrays
        if self.flags is not None:
            self.flags = np.asarray(self.flags, dtype=bool).ravel()
            if self.flags.size != self.size:
                raise ValueError("flags must have one entry per element")

    @property
    def size(self) -> int:
        return next(iter(self.data.values())).size

    def x_extent(self) -> tuple[float, float] | None:
        d = self.data
        if self.size == 0 or self.kind == "hlines":
            return None
        if self.kind == "bars":
            return float(min(d["x0"].min(), d["x1"].min())), float(max(d["x0"].max(), d["x1"].max()))
        if self.kind == "dots":
            return float((d["x"] - d["r"]).min()), float((d["x"] + d["r"]).max())
        return float(d["x"].min()), float(d["x"].max())

    def y_extent(self) -> tuple[float, float] | None:
        d = self.data
        if self.size == 0:
            return None
        if self.kind == "bars":
            ys = np.concatenate([d["y0"], d["y1"]])
        elif self.kind in ("intervals", "ribbons"):
            ys = np.concatenate([d["lo"], d["hi"]])
        elif self.kind == "dots":
            ys = np.concatenate([d["y"] - d["r"], d["y"] + d["r"]])
        else:
            ys = d["y"]
        return float(ys.min()), float(ys.max())


@dataclass
class PlotSpec:
    layers: list = field(default_factory=list)
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    x_scale: str = "linear"
    y_scale: str = "linear"
    xlim: tuple | None = None
    ylim: tuple | None = None
    annotations: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    width: int = 480
    height: int = 360

    def __post_init__(self):
        for s in (self.x_scale, self.y_scale):
            if s not in SCALES:
                raise ValueError(f"unknown scale {s!r}")
        if self.x_scale != "linear":
            raise ValueError("only the y axis supports sqrt_labels")

    def add(self, layer: Layer) -> "PlotSpec":
        self.layers.append(layer)
        return self

    def limits(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """Data limits, padded by 4% and never degenerate."""
        xs = [e for e in (l.x_extent() for l in self.layers) if e]
        ys = [e for e in (l.y_extent() for l in self.layers) if e]
        xlim = self.xlim or _pad(xs)
        ylim = self.ylim or _pad(ys)
        return tuple(map(float, xlim)), tuple(map(float, ylim))


def _pad(extents) -> tuple[float, float]:
    if not extents:
        return 0.0, 1.0
    lo = min(e[0] for e in extents)
    hi = max(e[1] for e in extents)
    if hi <= lo:
        return lo - 0.5, hi + 0.5
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def nice_ticks(lo: float, hi: float, target: int = 5) -> np.ndarray:
    """Round-number tick positions covering [lo, hi]."""
    if hi <= lo:
        return np.array([lo])
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step) * step
    ticks = np.arange(start, hi + step * 1e-9, step)
    return np.round(ticks / step) * step


def sqrt_ticks(lo: float, hi: float, target: int = 5) -> tuple[np.ndarray, list[str]]:
    """Ticks for a square-root-scaled axis labelled with untransformed values.

    ``lo``/``hi`` are axis positions (square roots, possibly negative for
    hanging bars). Ticks sit at round positions p and are labelled
    sign(p) * p**2, so labels 1, 4, 9 fall at positions 1, 2, 3.
    """
    pos = nice_ticks(lo, hi, target)
    keep = (pos >= lo - 1e-12) & (pos <= hi + 1e-12)
    pos = pos[keep]
    values = np.sign(pos) * pos * pos
    return pos, [_fmt_tick(float(f"{v:.10g}")) for v in values]


def _fmt_tick(v: float) -> str:
    if v == int(v):
        return str(int(v))
    return f"{v:g}"


def linear_ticks(lo: float, hi: float, target: int = 5) -> tuple[np.ndarray, list[str]]:
    pos = nice_ticks(lo, hi, target)
    return pos, [_fmt_tick(float(f"{v:.10g}")) for v in pos]
