"""Graphical uniformity test for PIT values.

The ECDF of the PIT values is evaluated at K equidistant points of the unit
interval and compared with simultaneous 1 - alpha bands built from
pointwise binomial intervals at an adjusted level gamma. gamma is calibrated
by simulating uniform samples so that the fraction of null ECDF paths
leaving the bands anywhere is at most alpha.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import binom

from .pit import PitSet

CALIBRATION_SEED = 20220527
CALIBRATION_REPLICATES = 10_000
GAMMA_TOL = 1e-6
MAX_K = 100


@dataclass(frozen=True)
class EcdfEvaluation:
    z: np.ndarray
    ecdf: np.ndarray
    n: int


@dataclass(frozen=True)
class SimultaneousBands:
    alpha: float
    gamma: float
    z: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    n: int

    @property
    def k(self) -> int:
        return self.z.size


@dataclass(frozen=True)
class GofVerdict:
    passed: bool
    first_exit: tuple[float, str] | None
    bands: SimultaneousBands
    ecdf: EcdfEvaluation
    style: str = "ecdf"

    @property
    def largest_deviation(self) -> tuple[float, float]:
        """(z, ecdf - z) at the point farthest from the diagonal."""
        dev = self.ecdf.ecdf - self.ecdf.z
        i = int(np.argmax(np.abs(dev)))
        return float(self.ecdf.z[i]), float(dev[i])

    def plot_arrays(self) -> dict:
        """Curves to draw; the difference style subtracts z from every curve."""
        z = self.ecdf.z
        shift = z if self.style == "ecdf_difference" else 0.0
        return {
            "z": z,
            "ecdf": self.ecdf.ecdf - shift,
            "lower": self.bands.lower - shift,
            "upper": self.bands.upper - shift,
        }

    def to_dict(self) -> dict:
        z_dev, dev = self.largest_deviation
        return {
            "pass": self.passed,
            "first_exit": None
            if self.first_exit is None
            else {"z": self.first_exit[0], "direction": self.first_exit[1]},
            "alpha": self.bands.alpha,
            "gamma": self.bands.gamma,
            "K": self.bands.k,
            "N": self.bands.n,
            "style": self.style,
            "largest_deviation": {"z": z_dev, "ecdf_minus_z": dev},
        }


def _values(pits) -> np.ndarray:
    if isinstance(pits, PitSet):
        return pits.values
    return PitSet(pits).values


def ecdf_at(pits, K: int) -> EcdfEvaluation:
    """ECDF of the PIT values at z_k = k/K, counting u_i <= z_k."""
    if K < 1:
        raise ValueError("K must be at least 1")
    u = np.sort(_values(pits))
    z = np.arange(1, K + 1) / K
    counts = np.searchsorted(u, z, side="right")
    return EcdfEvaluation(z=z, ecdf=counts / u.size, n=int(u.size))


def pointwise_band(n: int, z, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Central binomial interval, as ECDF fractions, at pointwise level 1 - gamma."""
    z = np.asarray(z, dtype=float)
    lo = binom.ppf(gamma / 2.0, n, z)
    hi = binom.ppf(1.0 - gamma / 2.0, n, z)
    return np.maximum(lo, 0.0) / n, hi / n


def simulate_null_counts(n: int, K: int, replicates: int, seed: int) -> np.ndarray:
    """ECDF counts at z_k = k/K for ``replicates`` uniform samples of size n.

    The counts of n uniforms in K equal cells are multinomial, so the
    cumulative cell counts have exactly the null ECDF distribution.
    """
    rng = np.random.default_rng(seed)
    cells = rng.multinomial(n, np.full(K, 1.0 / K), size=replicates)
    return np.cumsum(cells, axis=1)


def _exit_fraction(counts: np.ndarray, n: int, z: np.ndarray, gamma: float) -> float:
    lo = binom.ppf(gamma / 2.0, n, z)
    hi = binom.ppf(1.0 - gamma / 2.0, n, z)
    out = (counts < lo) | (counts > hi)
    return float(out.any(axis=1).mean())


@lru_cache(maxsize=128)
def calibrate_gamma(
    n: int,
    K: int,
    alpha: float,
    replicates: int = CALIBRATION_REPLICATES,
    seed: int = CALIBRATION_SEED,
) -> float:
    """Largest pointwise level gamma in (0, alpha] whose bands hold simultaneously.

    Bisection on gamma until the bracket is narrower than ``GAMMA_TOL``;
    the simulated exit fraction is nondecreasing in gamma. Results are
    cached per argument tuple.
    """
    if n < 1 or K < 1:
        raise ValueError("n and K must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    z = np.arange(1, K + 1) / K
    counts = simulate_null_counts(n, K, replicates, seed)
    if _exit_fraction(counts, n, z, alpha) <= alpha:
        return float(alpha)
    lo, hi = 0.0, float(alpha)
    while hi - lo > GAMMA_TOL:
        mid = 0.5 * (lo + hi)
        if _exit_fraction(counts, n, z, mid) <= alpha:
            lo = mid
        else:
            hi = mid
    return lo


def simultaneous_bands(
    n: int,
    K: int,
    alpha: float = 0.05,
    replicates: int = CALIBRATION_REPLICATES,
    seed: int = CALIBRATION_SEED,
) -> SimultaneousBands:
    gamma = calibrate_gamma(n, K, alpha, replicates, seed)
    z = np.arange(1, K + 1) / K
    lower, upper = pointwise_band(n, z, gamma)
    return SimultaneousBands(alpha=alpha, gamma=gamma, z=z, lower=lower, upper=upper, n=n)


def default_k(n: int) -> int:
    return min(n, MAX_K)


def gof_test(
    pits,
    alpha: float = 0.05,
    K: int | None = None,
    style: str = "ecdf",
    replicates: int = CALIBRATION_REPLICATES,
    seed: int = CALIBRATION_SEED,
) -> GofVerdict:
    """Pass iff the PIT ECDF stays inside the simultaneous bands at every z_k.

    ``style`` only changes :meth:`GofVerdict.plot_arrays`; the verdict and
    first exit are the same for both styles.
    """
    if style not in ("ecdf", "ecdf_difference"):
        raise ValueError(f"unknown style {style!r}")
    u = _values(pits)
    K = default_k(u.size) if K is None else int(K)
    ev = ecdf_at(u, K)
    bands = simultaneous_bands(u.size, K, alpha, replicates, seed)
    below = ev.ecdf < bands.lower
    above = ev.ecdf > bands.upper
    out = below | above
    first = None
    if out.any():
        k = int(np.argmax(out))
        first = (float(ev.z[k]), "below" if below[k] else "above")
    return GofVerdict(passed=not out.any(), first_exit=first, bands=bands, ecdf=ev, style=style)
