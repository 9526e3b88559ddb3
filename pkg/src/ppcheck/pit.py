"""Probability integral transforms with respect to a plotted density.

The transform of a KDE is taken over the displayed range only and
renormalized there. Quantile dot plots are discrete, so their transform is
randomized within the probability range the dots around ``x`` cover.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .data import DataError, ObservationSample
from .estimators import (
    DensityEstimate,
    HistogramEstimate,
    KdeEstimate,
    QuantileDotPlot,
)

# Tags the PIT random stream so it never coincides with a generator that a
# caller seeded with the same integer (e.g. the one that simulated the data).
PIT_STREAM_TAG = 0x504954


def pit_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([PIT_STREAM_TAG, int(seed)])


@dataclass(frozen=True)
class PitSet:
    values: np.ndarray
    randomized: bool = False
    seed: int | None = None
    source: Mapping = field(default_factory=dict)

    def __post_init__(self):
        u = np.array(self.values, dtype=float, copy=True)
        if u.ndim != 1 or u.size < 1:
            raise DataError("PIT values must be a non-empty vector")
        if not np.all((u >= 0) & (u <= 1)):
            raise DataError("PIT values must lie in [0, 1]")
        u.setflags(write=False)
        object.__setattr__(self, "values", u)
        if self.randomized and self.seed is None:
            raise ValueError("a randomized PitSet must record its seed")

    def __len__(self) -> int:
        return self.values.size


def describe_estimate(est: DensityEstimate) -> dict:
    if isinstance(est, KdeEstimate):
        return {
            "estimator": "kde",
            "bandwidth": est.bandwidth,
            "bandwidth_method": est.bandwidth_method,
            "boundary": est.boundary,
            "bounds": list(est.bounds),
            "display_range": list(est.display_range),
            "grid_size": int(est.grid.size),
            "notes": list(est.notes),
        }
    if isinstance(est, HistogramEstimate):
        return {
            "estimator": "histogram",
            "rule": est.rule,
            "bin_width": est.bin_width,
            "n_bins": est.n_bins,
            "range": [float(est.edges[0]), float(est.edges[-1])],
            "notes": list(est.notes),
        }
    if isinstance(est, QuantileDotPlot):
        return {
            "estimator": "qdot",
            "n_q": est.n_q,
            "binwidth": est.binwidth,
            "n_stacks": int(est.stack_heights.size),
            "notes": list(est.notes),
        }
    raise TypeError(f"unknown estimate type {type(est).__name__}")


def pit_kde(est: KdeEstimate, x, method: str = "exact"):
    """CDF of the displayed, renormalized KDE at ``x``.

    ``method="exact"`` integrates the (reflected) Gaussian mixture over the
    display range in closed form. ``method="grid"`` integrates the plotted
    polyline by the trapezoid rule, interpolating linearly inside a cell.
    Values below / above the display range map to 0 / 1.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if method == "exact":
        out = est.cdf(x)
    elif method == "grid":
        g, d = est.grid, est.density
        cum = np.concatenate([[0.0], np.cumsum(np.diff(g) * (d[1:] + d[:-1]) / 2.0)])
        total = cum[-1]
        i = np.clip(np.searchsorted(g, x, side="right") - 1, 0, g.size - 2)
        t = np.clip(x - g[i], 0.0, g[i + 1] - g[i])
        slope = (d[i + 1] - d[i]) / (g[i + 1] - g[i])
        part = cum[i] + t * (d[i] + 0.5 * slope * t)
        out = np.clip(part / total, 0.0, 1.0)
        out = np.where(x <= g[0], 0.0, np.where(x >= g[-1], 1.0, out))
    else:
        raise ValueError(f"unknown KDE PIT method {method!r}")
    return float(out[0]) if scalar else out


def pit_histogram(est: HistogramEstimate, x):
    """PIT(x) = h * sum_{j<=J} f_j + (x - l_{J+1}) f_{J+1}, J = max{j : r_j <= x}."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    edges, f, h = est.edges, est.densities, est.bin_width
    cum = np.concatenate([[0.0], np.cumsum(h * f)])
    J = np.searchsorted(edges[1:], x, side="right")  # number of bins fully left of x
    inside = J < f.size
    Jc = np.minimum(J, f.size - 1)
    partial = np.where(inside, (x - edges[Jc]) * f[Jc], 0.0)
    out = np.clip(cum[J] + partial, 0.0, 1.0)
    out = np.where(x <= edges[0], 0.0, np.where(x >= edges[-1], 1.0, out))
    return float(out[0]) if scalar else out


def qdot_pit_interval(est: QuantileDotPlot, x):
    """Probability interval (lower, upper) a dot plot assigns to ``x``.

    ``lower`` counts dots lying fully left of ``x`` and ``upper`` counts dots
    whose left edge is at or left of ``x``; both are divided by n_q. A point
    left of every dot gets (0, 1/n_q).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    c, r, nq = est.centers, est.radius, est.n_q
    fully_left = np.searchsorted(c + r, x, side="left")
    reached = np.searchsorted(c - r, x, side="right")
    lower = fully_left / nq
    upper = np.where(reached == 0, 1.0 / nq, reached / nq)
    return lower, upper


def pit_qdot(est: QuantileDotPlot, x, rng: np.random.Generator):
    """Randomized PIT: a uniform draw on :func:`qdot_pit_interval`.

    One uniform is consumed per point whether or not its interval is
    degenerate, so the stream position never depends on the data.
    """
    scalar = np.ndim(x) == 0
    lower, upper = qdot_pit_interval(est, x)
    u = rng.random(lower.size)
    out = lower + u * (upper - lower)
    return float(out[0]) if scalar else out


def pit_randomized_discrete(cdf: Mapping, x, rng: np.random.Generator):
    """Randomized PIT of a discrete value: alpha F(x) + (1 - alpha) F(x-), alpha ~ U(0, 1).

    ``cdf`` maps each support point to its cumulative probability; F(x-) is
    the cumulative probability at the previous support point (0 for the first).
    """
    support = np.array(sorted(cdf), dtype=float)
    F = np.array([cdf[k] for k in sorted(cdf)], dtype=float)
    if np.any(np.diff(F) < 0) or not np.isclose(F[-1], 1.0):
        raise ValueError("cdf must be nondecreasing and end at 1")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    idx = np.searchsorted(support, x)
    found = (idx < support.size) & (support[np.minimum(idx, support.size - 1)] == x)
    if not np.all(found):
        bad = x[~found][0]
        raise ValueError(f"value {bad!r} is not in the support of the distribution")
    F_prev = np.concatenate([[0.0], F[:-1]])
    alpha = rng.random(x.size)
    out = alpha * F[idx] + (1.0 - alpha) * F_prev[idx]
    return float(out[0]) if scalar else out


def pit_sample(est: DensityEstimate, sample, seed: int | None = 0, kde_method: str = "exact") -> PitSet:
    """Transform every observation with the PIT matching the estimate type.

    Only dot plots are randomized; their draws come from :func:`pit_rng`
    so a given seed reproduces them bit-for-bit.
    """
    x = sample.values if isinstance(sample, ObservationSample) else ObservationSample(sample).values
    source = describe_estimate(est)
    if isinstance(est, KdeEstimate):
        source["pit_method"] = kde_method
        return PitSet(pit_kde(est, x, method=kde_method), source=source)
    if isinstance(est, HistogramEstimate):
        return PitSet(pit_histogram(est, x), source=source)
    if isinstance(est, QuantileDotPlot):
        seed = 0 if seed is None else int(seed)
        rng = pit_rng(seed)
        return PitSet(pit_qdot(est, x, rng), randomized=True, seed=seed, source=source)
    raise TypeError(f"unknown estimate type {type(est).__name__}")


def pit_from_cdf_values(values) -> PitSet:
    """Wrap externally computed predictive CDF values (e.g. LOO-PIT)."""
    u = np.asarray(values, dtype=float)
    if u.ndim != 1 or u.size < 1:
        raise DataError("expected a non-empty vector of CDF values")
    if not np.all(np.isfinite(u)) or np.any((u < 0) | (u > 1)):
        raise DataError("CDF values must lie in [0, 1]")
    return PitSet(u, source={"estimator": "external"})
