"""Ground-truth densities used to exercise the checks.

Four kinds are available:

``smooth_normal``
    standard normal.
``stepped``
    a bimodal density with jumps at -1/2 and 1/2: mass 2/5 from a standard
    normal restricted to x <= -1/2, a flat 1/5 on (-1/2, 1/2], and mass 2/5
    from N(0, sd=1/2) restricted to x > 1/2.
``bounded_exp``
    Exp(1) truncated to its central 80% interval [-ln 0.9, -ln 0.1].
``point_mass``
    standard normal where each value is replaced by 1 with probability 0.2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import norm

from .data import ObservationSample

KINDS = ("smooth_normal", "stepped", "bounded_exp", "point_mass")

STEP_LEFT, STEP_RIGHT = -0.5, 0.5
STEP_RIGHT_SD = 0.5
EXP_LO, EXP_HI = -math.log(0.9), -math.log(0.1)
POINT_MASS_VALUE, POINT_MASS_PROB = 1.0, 0.2

_PHI_LEFT = ndtr(STEP_LEFT)  # P(Z <= -1/2)
_PHI_RIGHT = ndtr(-STEP_RIGHT / STEP_RIGHT_SD)  # P(N(0, 1/2) > 1/2) = Phi(-1)


@dataclass(frozen=True)
class TrueDensity:
    kind: str
    pdf: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.random.Generator, int], np.ndarray]
    support: tuple[float, float]
    atoms: tuple[tuple[float, float], ...] = ()

    def sample(self, n: int, seed=None) -> np.ndarray:
        return self.sampler(np.random.default_rng(seed), n)


def _stepped_pdf(x):
    x = np.asarray(x, dtype=float)
    left = 0.4 / _PHI_LEFT * norm.pdf(x)
    right = 0.4 / _PHI_RIGHT * norm.pdf(x, scale=STEP_RIGHT_SD)
    return np.where(x <= STEP_LEFT, left, np.where(x <= STEP_RIGHT, 0.2, right))


def _stepped_cdf(x):
    x = np.asarray(x, dtype=float)
    left = 0.4 * ndtr(np.minimum(x, STEP_LEFT)) / _PHI_LEFT
    mid = 0.2 * np.clip(x - STEP_LEFT, 0.0, 1.0)
    tail = ndtr(-np.maximum(x, STEP_RIGHT) / STEP_RIGHT_SD)
    right = 0.4 * (_PHI_RIGHT - tail) / _PHI_RIGHT
    return left + mid + right


def _stepped_sampler(rng, n):
    u = rng.random(n)
    branch = rng.choice(3, size=n, p=[0.4, 0.2, 0.4])
    left = ndtri(u * _PHI_LEFT)
    mid = STEP_LEFT + u
    # upper tail via the survival function keeps precision far out
    right = -STEP_RIGHT_SD * ndtri(u * _PHI_RIGHT)
    return np.choose(branch, [left, mid, right])


def _exp_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= EXP_LO) & (x <= EXP_HI), np.exp(-x) / 0.8, 0.0)


def _exp_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), EXP_LO, EXP_HI)
    return (0.9 - np.exp(-x)) / 0.8


def _exp_sampler(rng, n):
    return -np.log(0.9 - 0.8 * rng.random(n))


def _pm_pdf(x):
    # continuous part only; the atom is listed in ``atoms``
    return (1 - POINT_MASS_PROB) * norm.pdf(x)


def _pm_cdf(x):
    x = np.asarray(x, dtype=float)
    return (1 - POINT_MASS_PROB) * ndtr(x) + POINT_MASS_PROB * (x >= POINT_MASS_VALUE)


def _pm_sampler(rng, n):
    x = rng.standard_normal(n)
    x[rng.random(n) < POINT_MASS_PROB] = POINT_MASS_VALUE
    return x


TRUE_DENSITIES = {
    "smooth_normal": TrueDensity(
        "smooth_normal", norm.pdf, ndtr, lambda rng, n: rng.standard_normal(n), (-np.inf, np.inf)
    ),
    "stepped": TrueDensity("stepped", _stepped_pdf, _stepped_cdf, _stepped_sampler, (-np.inf, np.inf)),
    "bounded_exp": TrueDensity("bounded_exp", _exp_pdf, _exp_cdf, _exp_sampler, (EXP_LO, EXP_HI)),
    "point_mass": TrueDensity(
        "point_mass",
        _pm_pdf,
        _pm_cdf,
        _pm_sampler,
        (-np.inf, np.inf),
        atoms=((POINT_MASS_VALUE, POINT_MASS_PROB),),
    ),
}


def true_density(kind: str) -> TrueDensity:
    try:
        return TRUE_DENSITIES[kind]
    except KeyError:
        raise ValueError(f"unknown density kind {kind!r}; expected one of {KINDS}") from None


def generate(kind: str, n: int, seed=None) -> ObservationSample:
    """Draw ``n`` iid values from the named density, deterministically for a given seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    dens = true_density(kind)
    return ObservationSample(dens.sample(n, seed), label=kind)
