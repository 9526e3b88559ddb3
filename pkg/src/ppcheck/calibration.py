"""Calibration checks for binary, categorical and ordinal predictions.

The main tool is the PAV-adjusted calibration plot: conditional event
probabilities (CEPs) from isotonic regression of outcomes on predicted
probabilities, with pointwise consistency bands obtained by refitting to
outcomes simulated from the predictive distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import isotonic_regression
from scipy.stats import beta

from .data import BinaryPredictionTable, CategoricalPredictionTable, DataError
from .plotspec import Layer, PlotSpec

DEFAULT_SIMULATIONS = 2000


@dataclass(frozen=True)
class IsotonicFit:
    """Isotonic fit in prediction order.

    ``order`` sorts the input stably by prediction; ``sorted_pred``,
    ``cep`` and ``block_index`` follow that order. Block ``b`` holds
    ``block_counts[b]`` observations whose outcomes sum to ``block_sums[b]``.
    """

    sorted_pred: np.ndarray
    cep: np.ndarray
    block_index: np.ndarray
    order: np.ndarray
    block_sums: np.ndarray
    block_counts: np.ndarray

    @property
    def n_blocks(self) -> int:
        return self.block_sums.size

    def cep_in_input_order(self) -> np.ndarray:
        out = np.empty_like(self.cep)
        out[self.order] = self.cep
        return out

    def exact_mean(self) -> Fraction:
        """Mean of the fitted values in rational arithmetic."""
        n = int(self.block_counts.sum())
        total = sum(Fraction(int(c)) * Fraction(int(s), int(c)) for s, c in zip(self.block_sums, self.block_counts))
        return total / n


def _tie_groups(sorted_pred: np.ndarray) -> np.ndarray:
    """Group id of each sorted prediction; equal predictions share a group."""
    return np.concatenate([[0], np.cumsum(sorted_pred[1:] != sorted_pred[:-1])])


def _pav_sorted(y_sorted: np.ndarray, group: np.ndarray, n_groups: int):
    """PAV on outcomes already in prediction order, with ties pre-pooled.

    Returns (block index per observation, block sums, block counts).
    """
    g_sum = np.bincount(group, weights=y_sorted, minlength=n_groups)
    g_cnt = np.bincount(group, minlength=n_groups)
    res = isotonic_regression(g_sum / g_cnt, weights=g_cnt.astype(float), increasing=True)
    starts = res.blocks[:-1]
    g_block = np.repeat(np.arange(starts.size), np.diff(res.blocks))
    b_sum = np.add.reduceat(g_sum, starts).round().astype(np.int64)
    b_cnt = np.add.reduceat(g_cnt, starts)
    return g_block[group], b_sum, b_cnt


def pav_isotonic(pred, outcome) -> IsotonicFit:
    """Isotonic least-squares fit of binary outcomes on predicted probabilities.

    Observations are sorted stably by prediction and equal predictions are
    pooled into one block before pooling adjacent violators, so the fit does
    not depend on the input order of tied predictions. Each block's CEP is
    its mean outcome.
    """
    p = np.asarray(pred, dtype=float)
    y = np.asarray(outcome, dtype=float)
    if p.ndim != 1 or p.shape != y.shape:
        raise DataError("pred and outcome must be vectors of equal length")
    if p.size < 1:
        raise DataError("need at least one observation")
    if np.any((y != 0) & (y != 1)):
        raise DataError("outcome must be 0 or 1")
    order = np.argsort(p, kind="stable")
    sp = p[order]
    group = _tie_groups(sp)
    block, b_sum, b_cnt = _pav_sorted(y[order], group, int(group[-1]) + 1)
    cep = (b_sum / b_cnt)[block]
    return IsotonicFit(sp, cep, block, order, b_sum, b_cnt)


@dataclass(frozen=True)
class ConsistencyBands:
    """Pointwise bands for the CEP at each sorted observed prediction."""

    at_pred: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    level: float = 0.95
    draws_used: int = 0
    source: str = "draws"


@dataclass(frozen=True)
class CalibrationCurve:
    kind: str
    x: np.ndarray
    y: np.ndarray
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    outside_flags: np.ndarray | None = None
    level: float = 0.95
    label: str = ""
    fit: IsotonicFit | None = None
    bands: ConsistencyBands | None = None
    counts: np.ndarray | None = None

    @property
    def n_flagged(self) -> int:
        return 0 if self.outside_flags is None else int(self.outside_flags.sum())

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "label": self.label,
            "level": self.level,
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "n_flagged": self.n_flagged,
        }
        if self.lo is not None:
            d["lo"] = self.lo.tolist()
            d["hi"] = self.hi.tolist()
            d["outside"] = self.outside_flags.astype(int).tolist()
        if self.bands is not None:
            d["bands_source"] = self.bands.source
            d["draws_used"] = self.bands.draws_used
        if self.counts is not None:
            d["counts"] = self.counts.tolist()
        return d


def clopper_pearson(k, n, level: float = 0.95) -> tuple[np.ndarray, np.ndarray]:
    """Exact central binomial interval for ``k`` successes in ``n`` trials."""
    k = np.asarray(k, dtype=float)
    n = np.asarray(n, dtype=float)
    a = (1.0 - level) / 2.0
    with np.errstate(invalid="ignore"):
        lo = np.where(k > 0, beta.ppf(a, k, n - k + 1), 0.0)
        hi = np.where(k < n, beta.ppf(1.0 - a, k + 1, n - k), 1.0)
    return lo, hi


def binned_calibration(table: BinaryPredictionTable, n_bins: int = 10, level: float = 0.95) -> CalibrationCurve:
    """Event rate against mean prediction in equal-width probability bins.

    Empty bins are omitted. Each point carries a Clopper-Pearson interval
    for the event rate and is flagged when its mean prediction lies outside.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    p = table.predicted_prob
    y = table.outcome.astype(float)
    b = np.minimum((p * n_bins).astype(np.int64), n_bins - 1)
    cnt = np.bincount(b, minlength=n_bins)
    keep = cnt > 0
    k = np.bincount(b, weights=y, minlength=n_bins)[keep]
    n = cnt[keep]
    x = np.bincount(b, weights=p, minlength=n_bins)[keep] / n
    rate = k / n
    lo, hi = clopper_pearson(k, n, level)
    flags = (x < lo) | (x > hi)
    return CalibrationCurve("binned", x, rate, lo, hi, flags, level, counts=n)


def simulate_outcomes(pred: np.ndarray, n_sim: int, seed: int) -> np.ndarray:
    """Bernoulli(pred) outcomes, one row per simulation."""
    rng = np.random.default_rng(seed)
    return (rng.random((n_sim, pred.size)) < pred).astype(np.int8)


def consistency_bands(
    fit: IsotonicFit, sims: np.ndarray, level: float = 0.95, source: str = "draws"
) -> ConsistencyBands:
    """Central ``level`` quantiles of refitted CEPs at every sorted prediction.

    ``sims`` holds simulated outcome vectors in input order, one per row.
    Predictions are shared, so each refit's step function evaluated at the
    observed predictions is just its fitted vector.
    """
    group = _tie_groups(fit.sorted_pred)
    n_groups = int(group[-1]) + 1
    sorted_sims = np.asarray(sims)[:, fit.order].astype(float)
    ceps = np.empty(sorted_sims.shape)
    for s, ys in enumerate(sorted_sims):
        block, b_sum, b_cnt = _pav_sorted(ys, group, n_groups)
        ceps[s] = (b_sum / b_cnt)[block]
    a = (1.0 - level) / 2.0
    lo = np.quantile(ceps, a, axis=0)
    hi = np.quantile(ceps, 1.0 - a, axis=0)
    return ConsistencyBands(fit.sorted_pred, lo, hi, level, int(sims.shape[0]), source)


def pav_calibration_plot(
    table: BinaryPredictionTable,
    level: float = 0.95,
    seed: int = 0,
    n_sim: int = DEFAULT_SIMULATIONS,
    bands: bool = True,
    label: str = "",
) -> CalibrationCurve:
    """PAV-adjusted calibration curve with pointwise consistency bands.

    Bands come from the table's predictive outcome draws when present and
    otherwise from ``n_sim`` Bernoulli(pred) simulations seeded by ``seed``.
    Points where the observed CEP leaves its band are flagged.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    fit = pav_isotonic(table.predicted_prob, table.outcome)
    if not bands:
        return CalibrationCurve("pav", fit.sorted_pred, fit.cep, level=level, label=label, fit=fit)
    if table.predictive_outcome_draws is not None:
        sims, source = table.predictive_outcome_draws, "draws"
    else:
        sims, source = simulate_outcomes(table.predicted_prob, n_sim, seed), "bernoulli"
    cb = consistency_bands(fit, sims, level, source)
    flags = (fit.cep < cb.lo) | (fit.cep > cb.hi)
    return CalibrationCurve("pav", fit.sorted_pred, fit.cep, cb.lo, cb.hi, flags, level, label, fit, cb)


def pav_residuals(table: BinaryPredictionTable, covariate, curve: CalibrationCurve | None = None, **kw) -> PlotSpec:
    """CEP minus prediction against a covariate, flagged where the CEP leaves its band.

    ``covariate`` is a vector or the name of one of the table's covariates.
    ``curve`` defaults to :func:`pav_calibration_plot` of the table with ``kw``.
    """
    name = covariate if isinstance(covariate, str) else "covariate"
    if isinstance(covariate, str):
        if covariate not in table.covariates:
            raise DataError(f"unknown covariate {covariate!r}")
        covariate = table.covariates[covariate]
    cov = np.asarray(covariate, dtype=float)
    if cov.shape != (table.n,):
        raise DataError(f"covariate has length {cov.size}, expected {table.n}")
    if curve is None:
        curve = pav_calibration_plot(table, **kw)
    fit = curve.fit
    resid = fit.cep - fit.sorted_pred
    x = cov[fit.order]
    plot = PlotSpec(title="PAV-adjusted residuals", xlabel=name, ylabel="CEP - predicted")
    plot.add(Layer("hlines", {"y": [0.0]}, role="reference"))
    plot.add(Layer("points", {"x": x, "y": resid}, role="observed", flags=curve.outside_flags))
    plot.data.update(
        covariate=x.tolist(),
        residual=resid.tolist(),
        flags=[] if curve.outside_flags is None else curve.outside_flags.astype(int).tolist(),
    )
    return plot


def _binary_table(pred: np.ndarray, outcome: np.ndarray) -> BinaryPredictionTable:
    return BinaryPredictionTable(np.clip(pred, 0.0, 1.0), outcome.astype(np.int8))


def ovo_calibration(
    table: CategoricalPredictionTable, level: float = 0.95, seed: int = 0, n_sim: int = DEFAULT_SIMULATIONS
) -> list[CalibrationCurve]:
    """One-versus-others PAV curves, one per category (seed XOR (m-1) for category m)."""
    M = table.n_categories
    curves = []
    for m in range(1, M + 1):
        bt = _binary_table(table.prob_matrix[:, m - 1], table.outcome == m)
        curves.append(pav_calibration_plot(bt, level, seed ^ (m - 1), n_sim, label=f"category {m} vs others"))
    return curves


def cumulative_ordinal_calibration(
    table: CategoricalPredictionTable, level: float = 0.95, seed: int = 0, n_sim: int = DEFAULT_SIMULATIONS
) -> list[CalibrationCurve]:
    """PAV curves for the M-1 cumulative events y <= m.

    Curve m uses seed XOR (m-1), so the first curve shares its simulations
    with a binary check of category 1 run with the same seed.
    """
    if not table.ordered:
        raise DataError("cumulative calibration needs an ordered categorical table")
    cum = np.cumsum(table.prob_matrix, axis=1)
    curves = []
    for m in range(1, table.n_categories):
        bt = _binary_table(cum[:, m - 1], table.outcome <= m)
        curves.append(pav_calibration_plot(bt, level, seed ^ (m - 1), n_sim, label=f"y <= {m}"))
    return curves


def _simulate_categories(P: np.ndarray, n_sim: int, seed: int) -> np.ndarray:
    """Categorical draws 1..M per row of ``P``, one row per simulation."""
    rng = np.random.default_rng(seed)
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0
    u = rng.random((n_sim, P.shape[0]))
    return 1 + (u[:, :, None] > cum[None, :, :]).sum(axis=2)


def bar_check(source, level: float = 0.9, seed: int = 0, n_sim: int = DEFAULT_SIMULATIONS) -> PlotSpec:
    """Observed category frequencies as bars with predictive means and central intervals.

    ``source`` is a :class:`BinaryPredictionTable`, a
    :class:`CategoricalPredictionTable` or a count frequency table. Outcomes
    are simulated from the predicted probabilities when no draws are given.
    This check is weak: a model that only matches marginal frequencies passes.
    """
    from .rootogram import CountFrequencyTable

    if isinstance(source, BinaryPredictionTable):
        cats = np.array([0, 1])
        obs = np.bincount(source.outcome, minlength=2)
        sims = source.predictive_outcome_draws
        if sims is None:
            sims = simulate_outcomes(source.predicted_prob, n_sim, seed)
        ones = sims.sum(axis=1)
        freq = np.column_stack([sims.shape[1] - ones, ones])
    elif isinstance(source, CategoricalPredictionTable):
        M = source.n_categories
        cats = np.arange(1, M + 1)
        obs = np.bincount(source.outcome, minlength=M + 1)[1:]
        draws = _simulate_categories(source.prob_matrix, n_sim, seed)
        freq = np.stack([np.bincount(d, minlength=M + 1)[1:] for d in draws])
    elif isinstance(source, CountFrequencyTable):
        cats, obs, freq = source.counts, source.observed_freq, source.predictive_freq
    else:
        raise TypeError(f"bar_check does not accept {type(source).__name__}")
    a = (1.0 - level) / 2.0
    mean = freq.mean(axis=0)
    lo = np.quantile(freq, a, axis=0)
    hi = np.quantile(freq, 1.0 - a, axis=0)
    flags = (obs < lo) | (obs > hi)
    c = cats.astype(float)
    plot = PlotSpec(title="Bar check", xlabel="category", ylabel="count")
    plot.add(Layer("bars", {"x0": c - 0.4, "x1": c + 0.4, "y0": np.zeros_like(c), "y1": obs}, role="observed"))
    plot.add(Layer("intervals", {"x": c, "lo": lo, "hi": hi}, role="predictive"))
    plot.add(Layer("points", {"x": c, "y": mean}, role="predictive", flags=flags))
    plot.data.update(
        categories=cats.tolist(),
        observed=obs.tolist(),
        mean=mean.tolist(),
        lo=lo.tolist(),
        hi=hi.tolist(),
        level=level,
        flags=[int(k) for k in cats[flags]],
    )
    return plot
