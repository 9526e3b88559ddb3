"""Density visualizations: Gaussian KDE, equal-width histogram, quantile dot plot.

Each fit returns an immutable estimate that carries both the drawable
geometry and everything its probability integral transform needs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .data import DataError, ObservationSample

SQRT_2PI = math.sqrt(2.0 * math.pi)
DISPLAY_BANDWIDTHS = 3.0
SJ_BINS = 1000
QDOT_AUTO_BINS = 30


class DegenerateSampleError(DataError):
    """The sample has no spread, so no scale-based rule applies."""


class BandwidthWarning(UserWarning):
    pass


class BandwidthChoice(NamedTuple):
    value: float
    method: str
    fallback: bool = False


def _values(sample) -> np.ndarray:
    if isinstance(sample, ObservationSample):
        return sample.values
    return ObservationSample(sample).values


def _iqr(x: np.ndarray) -> float:
    q25, q75 = np.percentile(x, [25, 75])
    return float(q75 - q25)


# ---------------------------------------------------------------------------
# Bandwidth selection


def bandwidth_silverman(sample) -> float:
    """Silverman's rule of thumb, ``0.9 * min(sd, IQR/1.34) * N**(-1/5)``.

    When the IQR vanishes but the standard deviation does not (more than
    half the sample tied), the standard deviation alone is used.
    """
    x = _values(sample)
    n = x.size
    if n < 2:
        raise DegenerateSampleError("Silverman's rule needs at least two observations")
    sd = float(np.std(x, ddof=1))
    spread = min(sd, _iqr(x) / 1.34)
    if spread <= 0:
        spread = sd
    if not spread > 0:
        raise DegenerateSampleError("all observations are equal; bandwidth undefined")
    return 0.9 * spread * n ** (-0.2)


def _binned_pair_counts(x: np.ndarray, nb: int) -> tuple[float, np.ndarray]:
    """Counts of unordered pairs by absolute bin-index difference."""
    xmin = x.min()
    dd = (x.max() - xmin) * 1.01 / nb
    idx = np.minimum(np.floor((x - xmin) / dd).astype(np.int64), nb - 1)
    c = np.bincount(idx, minlength=nb).astype(float)
    cnt = np.correlate(c, c, mode="full")[nb - 1 :].copy()
    cnt[0] = (cnt[0] - x.size) / 2.0
    return dd, cnt


def _sj_functionals(n: int, dd: float, cnt: np.ndarray):
    lags = np.arange(cnt.size) * dd

    def phi4(h):
        delta = (lags / h) ** 2
        s = np.dot(cnt, (delta**2 - 6.0 * delta + 3.0) * np.exp(-delta / 2.0))
        s = 2.0 * s + 3.0 * n
        return s / (n * (n - 1) * h**5 * SQRT_2PI)

    def phi6(h):
        delta = (lags / h) ** 2
        s = np.dot(cnt, (delta**3 - 15.0 * delta**2 + 45.0 * delta - 15.0) * np.exp(-delta / 2.0))
        s = 2.0 * s - 15.0 * n
        return s / (n * (n - 1) * h**7 * SQRT_2PI)

    return phi4, phi6


def _sj(x: np.ndarray) -> tuple[float, bool]:
    n = x.size
    h_sil = bandwidth_silverman(x)
    sd = float(np.std(x, ddof=1))
    scale = min(sd, _iqr(x) / 1.349)
    if scale <= 0:
        scale = sd
    dd, cnt = _binned_pair_counts(x, SJ_BINS)
    phi4, phi6 = _sj_functionals(n, dd, cnt)

    a = 1.24 * scale * n ** (-1.0 / 7.0)
    b = 1.23 * scale * n ** (-1.0 / 9.0)
    c1 = 1.0 / (2.0 * math.sqrt(math.pi) * n)
    td = -phi6(b)
    sda = phi4(a)
    if not (np.isfinite(td) and td > 0 and np.isfinite(sda) and sda > 0):
        return h_sil, False
    alph2 = 1.357 * (sda / td) ** (1.0 / 7.0)

    def f(h):
        sd_h = phi4(alph2 * h ** (5.0 / 7.0))
        if not sd_h > 0:
            # negative functional estimate: the equation has no meaning here
            return -h
        return (c1 / sd_h) ** 0.2 - h

    lower, upper = h_sil / 10.0, h_sil * 10.0
    for attempt in range(100):
        fl, fu = f(lower), f(upper)
        if np.isfinite(fl) and np.isfinite(fu) and fl * fu <= 0:
            break
        if attempt % 2:
            lower /= 1.2
        else:
            upper *= 1.2
    else:
        return h_sil, False
    h = brentq(f, lower, upper, xtol=1e-9 * h_sil, rtol=4 * np.finfo(float).eps)
    if not h > 0:
        return h_sil, False
    return float(h), True


def bandwidth_sj(sample) -> float:
    """Sheather-Jones solve-the-equation plug-in bandwidth.

    Pairwise kernel functionals are evaluated on 1000 bins of the data
    range. If the equation cannot be bracketed the Silverman bandwidth is
    returned and a :class:`BandwidthWarning` is issued; use
    :func:`select_bandwidth` to receive the fallback as a flag instead.
    """
    x = _values(sample)
    if x.size < 4:
        raise DegenerateSampleError("Sheather-Jones needs at least four observations")
    if x.max() == x.min():
        raise DegenerateSampleError("all observations are equal; bandwidth undefined")
    h, ok = _sj(x)
    if not ok:
        warnings.warn("Sheather-Jones root not bracketed; using Silverman's rule", BandwidthWarning)
    return h


def select_bandwidth(sample, bw: Union[str, float] = "sj") -> BandwidthChoice:
    x = _values(sample)
    if isinstance(bw, bool):
        raise ValueError("bandwidth must be a positive number or a method name")
    if isinstance(bw, (int, float, np.floating)):
        if not (math.isfinite(bw) and bw > 0):
            raise ValueError(f"bandwidth must be positive, got {bw!r}")
        return BandwidthChoice(float(bw), "fixed")
    method = str(bw).lower()
    if method == "silverman":
        return BandwidthChoice(bandwidth_silverman(x), "silverman")
    if method == "sj":
        if x.size < 4:
            raise DegenerateSampleError("Sheather-Jones needs at least four observations")
        if x.max() == x.min():
            raise DegenerateSampleError("all observations are equal; bandwidth undefined")
        h, ok = _sj(x)
        return BandwidthChoice(h, "sj", fallback=not ok)
    raise ValueError(f"unknown bandwidth method {bw!r}; expected 'sj', 'silverman' or a number")


# ---------------------------------------------------------------------------
# KDE


@dataclass(frozen=True)
class KdeEstimate:
    """Gaussian KDE truncated to ``display_range`` and renormalized there.

    ``bounds`` holds the reflection bounds (``None`` for an open side).
    ``density`` on ``grid`` integrates to one by the trapezoid rule;
    ``normalization`` is the raw trapezoid mass that was divided out.
    """

    bandwidth: float
    data: np.ndarray
    display_range: tuple[float, float]
    bounds: tuple[float | None, float | None]
    grid: np.ndarray
    density: np.ndarray
    normalization: float
    bandwidth_method: str = "fixed"
    notes: tuple[str, ...] = ()

    kind = "kde"

    @property
    def boundary(self) -> str:
        return "none" if self.bounds == (None, None) else "reflect"

    def _centers(self) -> np.ndarray:
        parts = [self.data]
        lo, hi = self.bounds
        if lo is not None:
            parts.append(2.0 * lo - self.data)
        if hi is not None:
            parts.append(2.0 * hi - self.data)
        return np.concatenate(parts)

    def raw_density(self, x) -> np.ndarray:
        """Untruncated (reflected) kernel sum, integrating to one over the real line
        before truncation to the bounds."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return _kernel_sum(x, self._centers(), self.bandwidth) / self.data.size

    def _raw_cdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c = self._centers()
        out = np.empty(x.shape)
        for s in range(0, x.size, 2048):
            z = (x[s : s + 2048, None] - c[None, :]) / self.bandwidth
            out[s : s + 2048] = ndtr(z).sum(axis=1)
        return out / self.data.size

    def cdf(self, x) -> np.ndarray:
        """Exact CDF of the truncated, renormalized kernel mixture."""
        lo, hi = self.display_range
        x = np.atleast_1d(np.asarray(x, dtype=float))
        flo, fhi = self._raw_cdf([lo, hi])
        inner = (self._raw_cdf(np.clip(x, lo, hi)) - flo) / (fhi - flo)
        return np.clip(np.where(x <= lo, 0.0, np.where(x >= hi, 1.0, inner)), 0.0, 1.0)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw from the truncated mixture (rejection on the display range)."""
        lo, hi = self.display_range
        c = self._centers()
        out = np.empty(0)
        while out.size < n:
            m = 2 * (n - out.size) + 16
            draw = c[rng.integers(0, c.size, m)] + self.bandwidth * rng.standard_normal(m)
            out = np.concatenate([out, draw[(draw >= lo) & (draw <= hi)]])
        return out[:n]


def _kernel_sum(x: np.ndarray, centers: np.ndarray, h: float) -> np.ndarray:
    out = np.empty(x.shape)
    for s in range(0, x.size, 1024):
        z = (x[s : s + 1024, None] - centers[None, :]) / h
        out[s : s + 1024] = np.exp(-0.5 * z * z).sum(axis=1)
    return out / (h * SQRT_2PI)


def fit_kde(
    sample,
    bandwidth: Union[str, float] = "sj",
    boundary: str = "none",
    bounds: tuple[float | None, float | None] = (None, None),
    grid_size: int = 512,
) -> KdeEstimate:
    """Fit a Gaussian KDE for display.

    Parameters
    ----------
    sample : ObservationSample or array_like
    bandwidth : float or {"sj", "silverman"}
    boundary : {"none", "reflect", "auto"}
        ``reflect`` mirrors kernel mass at the declared ``bounds``;
        ``auto`` reflects at bounds found by :func:`ppcheck.detect.detect_bounds`.
    bounds : (lo, hi)
        Declared bounds for ``reflect``; either side may be ``None``.
    grid_size : int
        Number of equispaced evaluation points over the display range.
    """
    x = _values(sample)
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    choice = select_bandwidth(x, bandwidth)
    h = choice.value
    notes = []
    if choice.fallback:
        notes.append("sj_fallback_silverman")

    if boundary == "none":
        lo_b, hi_b = None, None
    elif boundary == "reflect":
        lo_b, hi_b = bounds
    elif boundary == "auto":
        from .detect import detect_bounds

        lo_b, hi_b = detect_bounds(x) if x.size >= 10 else (None, None)
    else:
        raise ValueError(f"unknown boundary mode {boundary!r}")
    if lo_b is not None and hi_b is not None and not lo_b < hi_b:
        raise ValueError(f"invalid bounds: lower {lo_b} must be below upper {hi_b}")
    if (lo_b is not None and x.min() < lo_b) or (hi_b is not None and x.max() > hi_b):
        raise ValueError("observations fall outside the declared bounds")

    lo = x.min() - DISPLAY_BANDWIDTHS * h
    hi = x.max() + DISPLAY_BANDWIDTHS * h
    if lo_b is not None:
        lo = max(lo, float(lo_b))
    if hi_b is not None:
        hi = min(hi, float(hi_b))

    centers = [x]
    if lo_b is not None:
        centers.append(2.0 * lo_b - x)
    if hi_b is not None:
        centers.append(2.0 * hi_b - x)
    grid = np.linspace(lo, hi, grid_size)
    raw = _kernel_sum(grid, np.concatenate(centers), h) / x.size
    norm = float(np.trapezoid(raw, grid))
    density = raw / norm
    density.setflags(write=False)
    grid.setflags(write=False)
    data = np.array(x, copy=True)
    data.setflags(write=False)
    return KdeEstimate(
        bandwidth=h,
        data=data,
        display_range=(float(lo), float(hi)),
        bounds=(None if lo_b is None else float(lo_b), None if hi_b is None else float(hi_b)),
        grid=grid,
        density=density,
        normalization=norm,
        bandwidth_method=choice.method,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Histogram


@dataclass(frozen=True)
class HistogramEstimate:
    bin_width: float
    edges: np.ndarray
    densities: np.ndarray
    counts: np.ndarray
    rule: str
    notes: tuple[str, ...] = ()

    kind = "histogram"

    @property
    def n_bins(self) -> int:
        return self.densities.size


def _widened_edges(xmin: float, xmax: float, h: float) -> np.ndarray:
    k = max(1, math.ceil((xmax - xmin) / h))
    start = xmin - (k * h - (xmax - xmin)) / 2.0
    edges = start + h * np.arange(k + 1)
    # guard the data range against rounding in the edge arithmetic
    edges[0] = min(edges[0], xmin)
    edges[-1] = max(edges[-1], xmax)
    return edges


def fit_histogram(sample, rule: str = "fd", *, bins: int | None = None, width: float | None = None):
    """Equal-width histogram normalized to a density.

    ``rule="fd"`` uses the Freedman-Diaconis width ``2 IQR N**(-1/3)``;
    ``rule="bins"`` splits ``[min, max]`` into ``bins`` equal bins;
    ``rule="width"`` uses the given ``width``. For ``fd`` and ``width`` the
    range is widened symmetrically to a whole number of bins.
    """
    x = _values(sample)
    n = x.size
    xmin, xmax = float(x.min()), float(x.max())
    notes = []
    if rule == "fd":
        if n < 2:
            raise DegenerateSampleError("Freedman-Diaconis needs at least two observations")
        h = 2.0 * _iqr(x) * n ** (-1.0 / 3.0)
        if h > 0:
            edges = _widened_edges(xmin, xmax, h)
        else:
            notes.append("fd_zero_iqr_fallback_bins")
            rule, bins = "bins", math.ceil(math.sqrt(n))
    if rule == "width":
        if width is None or not width > 0:
            raise ValueError("rule='width' needs a positive width")
        h = float(width)
        edges = _widened_edges(xmin, xmax, h)
    elif rule == "bins":
        if bins is None or bins < 1:
            raise ValueError("rule='bins' needs bins >= 1")
        if xmax > xmin:
            h = (xmax - xmin) / bins
            edges = xmin + h * np.arange(bins + 1)
            edges[-1] = xmax
        else:
            # zero range: one unit-width bin centred on the value
            notes.append("zero_range_unit_bin")
            h = 1.0
            edges = np.array([xmin - 0.5, xmin + 0.5])
    elif rule != "fd":
        raise ValueError(f"unknown histogram rule {rule!r}")
    counts, _ = np.histogram(x, bins=edges)
    dens = counts / (n * h)
    for arr in (edges, dens, counts):
        arr.setflags(write=False)
    return HistogramEstimate(
        bin_width=float(h), edges=edges, densities=dens, counts=counts, rule=rule, notes=tuple(notes)
    )


# ---------------------------------------------------------------------------
# Quantile dot plot


@dataclass(frozen=True)
class QuantileDotPlot:
    """Quantile dots stacked Wilkinson-style.

    ``centers[k]`` is the horizontal centre of dot ``k`` (sorted), shared by
    every dot of a stack; ``stack_of[k]`` is the dot's stack index and
    ``level[k]`` its height within that stack (0 at the bottom).
    """

    n_q: int
    quantiles: np.ndarray
    centers: np.ndarray
    radius: float
    binwidth: float
    stack_centers: np.ndarray
    stack_heights: np.ndarray
    stack_of: np.ndarray
    level: np.ndarray
    notes: tuple[str, ...] = field(default=())

    kind = "qdot"

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Each dot carries mass 1/n_q spread uniformly over its width."""
        k = rng.integers(0, self.n_q, n)
        return self.centers[k] + self.radius * rng.uniform(-1.0, 1.0, n)


def stack_dots(values: np.ndarray, binwidth: float):
    """Greedy left-to-right stacking of sorted ``values``.

    A new stack starts when a value exceeds the current stack's first
    member by more than ``binwidth``. Returns (stack index per value,
    stack centres as member midpoints, stack heights).
    """
    values = np.asarray(values, dtype=float)
    stack_of = np.empty(values.size, dtype=np.int64)
    starts = []
    anchor = None
    for i, v in enumerate(values):
        if anchor is None or v > anchor + binwidth:
            anchor = v
            starts.append(i)
        stack_of[i] = len(starts) - 1
    bounds = starts + [values.size]
    centers = np.array([(values[a] + values[b - 1]) / 2.0 for a, b in zip(bounds[:-1], bounds[1:])])
    heights = np.diff(bounds).astype(np.int64)
    return stack_of, centers, heights


def stack_dots_lattice(values: np.ndarray, binwidth: float, origin: float):
    """Stack sorted ``values`` into fixed bins [origin + j*b, origin + (j+1)*b).

    Stack centres are bin midpoints, so plots sharing ``origin`` and
    ``binwidth`` put their stacks on one lattice.
    """
    values = np.asarray(values, dtype=float)
    j = np.floor((values - origin) / binwidth)
    uniq, stack_of, heights = np.unique(j, return_inverse=True, return_counts=True)
    centers = origin + (uniq + 0.5) * binwidth
    return stack_of.astype(np.int64), centers, heights.astype(np.int64)


def fit_qdot(
    sample,
    n_q: int = 100,
    binwidth: Union[str, float] = "auto",
    origin: float | None = None,
) -> QuantileDotPlot:
    """Quantile dot plot of ``n_q`` sample quantiles at probabilities (k - 0.5)/n_q.

    Dots are stacked greedily from the left by default. Passing ``origin``
    stacks them on the fixed bin lattice ``origin + j * binwidth`` instead.
    """
    if n_q < 1:
        raise ValueError("n_q must be at least 1")
    x = _values(sample)
    probs = (np.arange(1, n_q + 1) - 0.5) / n_q
    q = np.quantile(x, probs)
    notes = []
    if binwidth == "auto":
        bw = (q[-1] - q[0]) / QDOT_AUTO_BINS
        if not bw > 0:
            notes.append("zero_quantile_range_unit_binwidth")
            bw = 1.0
    else:
        bw = float(binwidth)
        if not (math.isfinite(bw) and bw > 0):
            raise ValueError("binwidth must be positive")
    if origin is None:
        stack_of, stack_centers, heights = stack_dots(q, bw)
    else:
        stack_of, stack_centers, heights = stack_dots_lattice(q, bw, float(origin))
    centers = stack_centers[stack_of]
    first = np.concatenate([[0], np.cumsum(heights)[:-1]])
    level = np.arange(n_q) - first[stack_of]
    arrays = (q, centers, stack_centers, heights, stack_of, level)
    for arr in arrays:
        arr.setflags(write=False)
    return QuantileDotPlot(
        n_q=n_q,
        quantiles=q,
        centers=centers,
        radius=bw / 2.0,
        binwidth=bw,
        stack_centers=stack_centers,
        stack_heights=heights,
        stack_of=stack_of,
        level=level,
        notes=tuple(notes),
    )


DensityEstimate = Union[KdeEstimate, HistogramEstimate, QuantileDotPlot]
