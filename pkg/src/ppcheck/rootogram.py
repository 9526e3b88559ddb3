"""Count-data checks: frequency tables and rootograms.

Standing, hanging and suspended rootograms work on square-root frequencies
by default (``scale="raw"`` switches the differencing to raw frequencies).
The discrete style shows predictive means and intervals as points and
segments on a square-root axis labelled with untransformed frequencies, and
flags observed frequencies falling outside their interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .data import DataError, ObservationSample, PredictiveDraws, validate_pairing
from .plotspec import Layer, PlotSpec

STYLES = ("standing", "hanging", "suspended", "discrete")
BAR_HALF_WIDTH = 0.4


class NonCountDataError(DataError):
    """Raised when a count check receives negative or non-integer values."""


@dataclass(frozen=True)
class CountFrequencyTable:
    counts: np.ndarray
    observed_freq: np.ndarray
    predictive_freq: np.ndarray
    predictive_mean: np.ndarray
    interval: tuple[np.ndarray, np.ndarray]
    interval_mass: float = 0.9
    n: int = 0

    def __post_init__(self):
        if self.observed_freq.sum() != self.n:
            raise ValueError("observed frequencies do not sum to N")
        if self.predictive_freq.size and not np.all(self.predictive_freq.sum(axis=1) == self.n):
            raise ValueError("a predictive row does not sum to N")

    @property
    def c_max(self) -> int:
        return int(self.counts[-1])

    def outside(self) -> np.ndarray:
        lo, hi = self.interval
        return (self.observed_freq < lo) | (self.observed_freq > hi)

    def to_dict(self) -> dict:
        lo, hi = self.interval
        return {
            "counts": self.counts.tolist(),
            "observed_freq": self.observed_freq.tolist(),
            "predictive_mean": self.predictive_mean.tolist(),
            "interval_lo": lo.tolist(),
            "interval_hi": hi.tolist(),
            "interval_mass": self.interval_mass,
            "n": self.n,
        }


@dataclass(frozen=True)
class RootogramSpec:
    style: str = "discrete"
    interval_mass: float = 0.9
    scale: str = "sqrt"

    def __post_init__(self):
        if self.style not in STYLES:
            raise ValueError(f"unknown rootogram style {self.style!r}")
        if not 0 < self.interval_mass < 1:
            raise ValueError("interval_mass must lie in (0, 1)")
        if self.scale not in ("sqrt", "raw"):
            raise ValueError("scale must be 'sqrt' or 'raw'")
        if self.style == "discrete" and self.scale != "sqrt":
            raise ValueError("the discrete rootogram always uses the square-root axis")


def _as_counts(values, what: str) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if np.any(v < 0) or np.any(v != np.round(v)):
        raise NonCountDataError(
            f"{what} contain negative or non-integer values; "
            "rootograms need counts, use the density checks for continuous data"
        )
    return v.astype(np.int64)


def _row_bincount(mat: np.ndarray, size: int) -> np.ndarray:
    s = mat.shape[0]
    flat = (np.arange(s)[:, None] * size + mat).ravel()
    return np.bincount(flat, minlength=s * size).reshape(s, size)


def count_frequencies(
    obs, draws, c_max: Union[str, int] = "auto", interval_mass: float = 0.9
) -> CountFrequencyTable:
    """Frequencies of each count 0..c_max for the observation and every draw.

    With an integer ``c_max`` smaller than some predictive value, the last
    count collects everything at or above ``c_max``. ``c_max`` below the
    largest observed count is an error.
    """
    if not isinstance(obs, ObservationSample):
        obs = ObservationSample(obs)
    if not isinstance(draws, PredictiveDraws):
        draws = PredictiveDraws(draws)
    validate_pairing(obs, draws)
    if not 0 < interval_mass < 1:
        raise ValueError("interval_mass must lie in (0, 1)")
    y = _as_counts(obs.values, "observations")
    yrep = _as_counts(draws.matrix, "predictive draws")
    if c_max == "auto":
        top = int(max(y.max(), yrep.max()))
    else:
        top = int(c_max)
        if top < y.max():
            raise ValueError(f"c_max={top} is below the largest observed count {int(y.max())}")
    size = top + 1
    obs_freq = np.bincount(y, minlength=size)
    pred_freq = _row_bincount(np.minimum(yrep, top), size)
    tail = (1.0 - interval_mass) / 2.0
    lo = np.quantile(pred_freq, tail, axis=0)
    hi = np.quantile(pred_freq, 1.0 - tail, axis=0)
    return CountFrequencyTable(
        counts=np.arange(size),
        observed_freq=obs_freq,
        predictive_freq=pred_freq,
        predictive_mean=pred_freq.mean(axis=0),
        interval=(lo, hi),
        interval_mass=interval_mass,
        n=obs.n,
    )


def rootogram_geometry(table: CountFrequencyTable, style: str, scale: str = "sqrt") -> dict:
    """Bar extents per count for the bar-based styles.

    standing:  [0, t(obs)]
    hanging:   [t(mean) - t(obs), t(mean)]
    suspended: [0, t(obs) - t(mean)]
    with t = sqrt, or the identity for ``scale="raw"``.
    """
    t = np.sqrt if scale == "sqrt" else (lambda a: np.asarray(a, dtype=float))
    o = t(table.observed_freq)
    m = t(table.predictive_mean)
    zero = np.zeros_like(m)
    if style == "standing":
        return {"y0": zero, "y1": o}
    if style == "hanging":
        return {"y0": m - o, "y1": m}
    if style == "suspended":
        return {"y0": zero, "y1": o - m}
    raise ValueError(f"style {style!r} has no bars")


def rootogram(table: CountFrequencyTable, spec: RootogramSpec = RootogramSpec()) -> PlotSpec:
    """Rootogram of a frequency table in the requested style.

    The interval shown is the table's own; ``spec.interval_mass`` must match
    it (re-tabulate with :func:`count_frequencies` to change the mass).
    """
    if not np.isclose(spec.interval_mass, table.interval_mass):
        raise ValueError("spec.interval_mass differs from the table's interval mass")
    c = table.counts.astype(float)
    lo, hi = table.interval
    flags = table.outside()
    sqrt = spec.scale == "sqrt"
    t = np.sqrt if sqrt else (lambda a: np.asarray(a, dtype=float))
    plot = PlotSpec(
        title=f"{spec.style.capitalize()} rootogram",
        xlabel="count",
        ylabel="frequency" if spec.style == "discrete" else ("sqrt(frequency)" if sqrt else "frequency"),
    )
    if spec.style == "discrete":
        plot.y_scale = "sqrt_labels"
        plot.add(Layer("intervals", {"x": c, "lo": np.sqrt(lo), "hi": np.sqrt(hi)}, role="predictive"))
        plot.add(Layer("points", {"x": c, "y": np.sqrt(table.predictive_mean)}, role="predictive"))
        plot.add(Layer("points", {"x": c, "y": np.sqrt(table.observed_freq)}, role="observed", flags=flags))
    else:
        bars = rootogram_geometry(table, spec.style, spec.scale)
        x0, x1 = c - BAR_HALF_WIDTH, c + BAR_HALF_WIDTH
        plot.add(Layer("bars", {"x0": x0, "x1": x1, **bars}, role="observed"))
        if spec.style != "suspended":
            plot.add(Layer("ribbons", {"x": c, "lo": t(lo), "hi": t(hi)}, role="predictive"))
            plot.add(Layer("lines", {"x": c, "y": t(table.predictive_mean)}, role="predictive"))
        plot.add(Layer("hlines", {"y": [0.0]}, role="reference"))
        plot.data["bars"] = {k: v.tolist() for k, v in bars.items()}
    plot.data.update(table.to_dict())
    plot.data["flags"] = [int(k) for k in table.counts[flags]]
    plot.data["style"] = spec.style
    plot.data["scale"] = spec.scale
    return plot
