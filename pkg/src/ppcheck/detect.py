"""Pre-plot data diagnostics: repeated values / point masses and hard bounds."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, floor

import numpy as np

from .data import ObservationSample

POINT_MASS_THRESHOLD = 0.02
TAIL_SPACINGS = 30
BOUND_LEVEL = 0.025


@dataclass(frozen=True)
class DataDiagnosis:
    n: int
    n_unique: int
    max_rel_freq: float
    discrete_flag: bool
    point_mass_values: tuple[float, ...]
    left_bound: float | None = None
    right_bound: float | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "n_unique": self.n_unique,
            "max_rel_freq": self.max_rel_freq,
            "discrete_flag": self.discrete_flag,
            "point_mass_values": list(self.point_mass_values),
            "left_bound": self.left_bound,
            "right_bound": self.right_bound,
        }


def _values(sample) -> np.ndarray:
    if isinstance(sample, ObservationSample):
        return sample.values
    return ObservationSample(sample).values


def detect_discrete(sample, threshold: float = POINT_MASS_THRESHOLD) -> DataDiagnosis:
    """Count unique values; list values repeated in more than ``threshold`` of the sample.

    Relative frequencies are only inspected when at least one value repeats.
    """
    x = _values(sample)
    uniq, counts = np.unique(x, return_counts=True)
    rel = counts / x.size
    masses: tuple[float, ...] = ()
    if uniq.size < x.size:
        masses = tuple(float(v) for v in uniq[rel > threshold])
    return DataDiagnosis(
        n=int(x.size),
        n_unique=int(uniq.size),
        max_rel_freq=float(rel.max()),
        discrete_flag=bool(masses),
        point_mass_values=masses,
    )


def _irwin_hall_sf(n: int, t: Fraction) -> Fraction:
    """P(U_1 + ... + U_n >= t) for iid standard uniforms, in exact arithmetic."""
    if t <= 0:
        return Fraction(1)
    if t >= n:
        return Fraction(0)
    cdf = sum(
        (-1) ** k * comb(n, k) * (t - k) ** n for k in range(floor(t) + 1)
    ) / Fraction(factorial(n))
    return 1 - cdf


def _spacing_weight(tail: np.ndarray) -> float | None:
    """Sum of k*D_k over sum of D_k for the m gaps nearest the extreme.

    ``tail`` runs from the extreme inward; D_1 is the extreme gap.
    Returns ``None`` when every gap is zero.
    """
    gaps = np.abs(np.diff(tail))
    total = gaps.sum()
    if total == 0:
        return None
    k = np.arange(1, gaps.size + 1)
    return float(np.dot(k, gaps) / total)


def bound_pvalue(tail: np.ndarray) -> float:
    """Evidence that the extreme of ``tail`` sits at a hard bound.

    If the density is positive and locally flat at a bound, the gaps next to
    it are iid exponential and the normalized weights D_k / sum(D) are
    uniform spacings, so sum(k * w_k) = m - (sum of m-1 uniforms). A smooth
    tail stretches the outer gaps and drives the weighted sum down. The
    returned value is the lower-tail probability of the observed weighted sum
    under the bounded model; small values point to an open tail.
    """
    w = _spacing_weight(tail)
    m = tail.size - 1
    if w is None or m < 2:
        return 1.0
    return float(_irwin_hall_sf(m - 1, Fraction(m) - Fraction(w)))


def detect_bounds(
    sample, spacings: int = TAIL_SPACINGS, level: float = BOUND_LEVEL
) -> tuple[float | None, float | None]:
    """Detect hard lower/upper bounds from the gaps next to each extreme.

    Uses the ``spacings`` gaps nearest each extreme (fewer for small
    samples). A side is declared bounded, at its extreme order statistic,
    unless :func:`bound_pvalue` falls below ``level``.
    """
    x = np.sort(_values(sample))
    if x.size < 10:
        raise ValueError("bound detection needs at least 10 observations")
    m = min(spacings, x.size - 2)
    left_tail = x[: m + 1]
    right_tail = x[::-1][: m + 1]
    left = float(x[0]) if bound_pvalue(left_tail) >= level else None
    right = float(x[-1]) if bound_pvalue(right_tail) >= level else None
    return left, right


def diagnose(sample, threshold: float = POINT_MASS_THRESHOLD) -> DataDiagnosis:
    """Discreteness diagnosis plus bounds (bounds only for N >= 10)."""
    x = _values(sample)
    d = detect_discrete(x, threshold)
    lo = hi = None
    if x.size >= 10:
        lo, hi = detect_bounds(x)
    return DataDiagnosis(
        n=d.n,
        n_unique=d.n_unique,
        max_rel_freq=d.max_rel_freq,
        discrete_flag=d.discrete_flag,
        point_mass_values=d.point_mass_values,
        left_bound=lo,
        right_bound=hi,
    )
