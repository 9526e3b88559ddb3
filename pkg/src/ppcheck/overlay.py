"""Overlaid predictive checks: KDE overlays, histogram bin summaries, top-dot overlays."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .data import ObservationSample, PredictiveDraws, validate_pairing
from .estimators import fit_histogram, fit_kde, fit_qdot
from .pit import pit_sample
from .plotspec import Layer, PlotSpec
from .uniformity import gof_test

STYLES = ("kde", "histogram", "qdot")
KDE_DEFAULT_SUBSET = 50


@dataclass(frozen=True)
class OverlaySpec:
    style: str = "kde"
    draw_subset: int | None = None
    interval_mass: float = 0.9
    bandwidth: Union[str, float] = "sj"
    boundary: str = "none"
    bounds: tuple = (None, None)
    freeze_bandwidth: bool = False
    n_q: int = 100
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.style not in STYLES:
            raise ValueError(f"unknown overlay style {self.style!r}")
        if not 0 < self.interval_mass < 1:
            raise ValueError("interval_mass must lie in (0, 1)")
        if self.draw_subset is not None and self.draw_subset < 1:
            raise ValueError("draw_subset must be positive")

    def subset_size(self, n_draws: int) -> int:
        k = self.draw_subset
        if k is None:
            k = KDE_DEFAULT_SUBSET if self.style == "kde" else n_draws
        return min(k, n_draws)


def select_draws(n_draws: int, k: int, seed: int) -> np.ndarray:
    """``k`` distinct draw indices, chosen by ``seed`` and returned in increasing order."""
    if k >= n_draws:
        return np.arange(n_draws)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n_draws, size=k, replace=False))


def _prepare(obs, draws) -> tuple[ObservationSample, PredictiveDraws]:
    if not isinstance(obs, ObservationSample):
        obs = ObservationSample(obs)
    if not isinstance(draws, PredictiveDraws):
        draws = PredictiveDraws(draws)
    validate_pairing(obs, draws)
    return obs, draws


def overlay_kde(obs, draws, spec: OverlaySpec = OverlaySpec("kde")) -> PlotSpec:
    """Observation KDE over KDEs of a seeded subset of predictive draws.

    Every draw gets its own bandwidth from the same selection rule unless
    ``spec.freeze_bandwidth`` reuses the observation's. The observation curve
    also gets its PIT uniformity verdict, stored under ``annotations["gof"]``.
    """
    obs, draws = _prepare(obs, draws)
    kw = dict(boundary=spec.boundary, bounds=spec.bounds)
    est_obs = fit_kde(obs, bandwidth=spec.bandwidth, **kw)
    bw = est_obs.bandwidth if spec.freeze_bandwidth else spec.bandwidth
    idx = select_draws(draws.n_draws, spec.subset_size(draws.n_draws), spec.seed)
    plot = PlotSpec(title="KDE overlay", xlabel=obs.label, ylabel="density")
    lo, hi = est_obs.display_range
    for s in idx:
        est = fit_kde(draws.matrix[s], bandwidth=bw, **kw)
        lo, hi = min(lo, est.display_range[0]), max(hi, est.display_range[1])
        plot.add(Layer("lines", {"x": est.grid, "y": est.density}, role="predictive", label=f"draw {int(draws.draw_ids[s])}"))
    plot.add(Layer("lines", {"x": est_obs.grid, "y": est_obs.density}, role="observed", label=obs.label))
    plot.xlim = (lo, hi)
    verdict = gof_test(pit_sample(est_obs, obs, seed=spec.seed), alpha=spec.alpha)
    plot.annotations["gof"] = verdict.to_dict()
    plot.data.update(draw_indices=idx.tolist(), display_range=[lo, hi], observed_bandwidth=est_obs.bandwidth)
    return plot


def summarize_counts(counts: np.ndarray, mass: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-column mean and central ``mass`` quantiles of an S x B count matrix."""
    tail = (1.0 - mass) / 2.0
    mean = counts.mean(axis=0)
    lo = np.quantile(counts, tail, axis=0)
    hi = np.quantile(counts, 1.0 - tail, axis=0)
    return mean, lo, hi


def draw_bin_counts(draws: np.ndarray, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Counts of each draw row in ``edges`` plus values below / above the range.

    Uses the same closed-right last bin as :func:`numpy.histogram`, so for
    each row ``counts.sum() + below + above`` equals the row length.
    """
    draws = np.atleast_2d(draws)
    counts = np.stack([np.histogram(row, bins=edges)[0] for row in draws])
    below = (draws < edges[0]).sum(axis=1)
    above = (draws > edges[-1]).sum(axis=1)
    return counts, below, above


def overlay_histogram(obs, draws, spec: OverlaySpec = OverlaySpec("histogram")) -> PlotSpec:
    """Observed FD histogram with per-bin predictive means and central intervals.

    Predictive counts use the observation's bin edges. Draw values outside
    the observed range go to two overflow bins drawn just outside the axis
    range and listed in ``data["overflow"]``.
    """
    obs, draws = _prepare(obs, draws)
    est = fit_histogram(obs)
    edges = est.edges
    idx = select_draws(draws.n_draws, spec.subset_size(draws.n_draws), spec.seed)
    counts, below, above = draw_bin_counts(draws.matrix[idx], edges)
    mean, lo, hi = summarize_counts(counts, spec.interval_mass)
    o_mean, o_lo, o_hi = summarize_counts(np.column_stack([below, above]), spec.interval_mass)
    h = est.bin_width
    mids = (edges[:-1] + edges[1:]) / 2.0
    over_x = np.array([edges[0] - h / 2.0, edges[-1] + h / 2.0])

    plot = PlotSpec(title="Histogram overlay", xlabel=obs.label, ylabel="count")
    plot.add(Layer("bars", {"x0": edges[:-1], "x1": edges[1:], "y0": np.zeros_like(mids), "y1": est.counts}, role="observed"))
    plot.add(Layer("intervals", {"x": mids, "lo": lo, "hi": hi}, role="predictive"))
    plot.add(Layer("points", {"x": mids, "y": mean}, role="predictive"))
    overflow_flags = o_hi > 0
    plot.add(Layer("intervals", {"x": over_x, "lo": o_lo, "hi": o_hi}, role="overflow", flags=overflow_flags))
    plot.add(Layer("points", {"x": over_x, "y": o_mean}, role="overflow", flags=overflow_flags))
    total = counts.sum() + below.sum() + above.sum()
    plot.data.update(
        edges=edges.tolist(),
        observed_counts=est.counts.tolist(),
        mean=mean.tolist(),
        lo=lo.tolist(),
        hi=hi.tolist(),
        overflow={
            "below_mean": float(o_mean[0]),
            "above_mean": float(o_mean[1]),
            "mass_fraction": float((below.sum() + above.sum()) / total),
        },
        draw_indices=idx.tolist(),
        interval_mass=spec.interval_mass,
    )
    return plot


def overlay_qdot(obs, draws, spec: OverlaySpec = OverlaySpec("qdot")) -> PlotSpec:
    """Observation dot plot with the top dot of every stack of each draw's dot plot.

    Observation and draws are stacked on one bin lattice: the observation's
    binwidth with bins anchored half a bin left of its lowest quantile.
    """
    obs, draws = _prepare(obs, draws)
    ref = fit_qdot(obs, n_q=spec.n_q)
    b = ref.binwidth
    origin = float(ref.quantiles[0]) - b / 2.0
    est = fit_qdot(obs, n_q=spec.n_q, binwidth=b, origin=origin)
    idx = select_draws(draws.n_draws, spec.subset_size(draws.n_draws), spec.seed)

    plot = PlotSpec(title="Quantile dot overlay", xlabel=obs.label, ylabel="")
    plot.add(
        Layer(
            "dots",
            {"x": est.centers, "y": (est.level + 0.5) * b, "r": np.full(est.n_q, est.radius)},
            role="observed",
        )
    )
    tops_x, tops_h, tops_draw = [], [], []
    for s in idx:
        d = fit_qdot(draws.matrix[s], n_q=spec.n_q, binwidth=b, origin=origin)
        tops_x.append(d.stack_centers)
        tops_h.append(d.stack_heights)
        tops_draw.append(np.full(d.stack_heights.size, s))
    tx = np.concatenate(tops_x)
    th = np.concatenate(tops_h)
    plot.add(Layer("dots", {"x": tx, "y": (th - 0.5) * b, "r": np.full(tx.size, est.radius)}, role="predictive"))
    plot.data.update(
        binwidth=b,
        origin=origin,
        top_centers=tx.tolist(),
        top_heights=th.tolist(),
        top_draw=np.concatenate(tops_draw).tolist(),
        observed_stack_centers=est.stack_centers.tolist(),
        observed_stack_heights=est.stack_heights.tolist(),
    )
    return plot
