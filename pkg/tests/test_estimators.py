import numpy as np
import pytest
from scipy.integrate import trapezoid

from ppcheck.estimators import (
    DegenerateSampleError,
    bandwidth_silverman,
    bandwidth_sj,
    fit_histogram,
    fit_kde,
    fit_qdot,
    stack_dots_lattice,
)
from ppcheck.synthetic import generate


def test_silverman_formula():
    x = np.random.default_rng(3).normal(size=100)
    sd = x.std(ddof=1)
    q25, q75 = np.percentile(x, [25, 75])
    expected = 0.9 * min(sd, (q75 - q25) / 1.34) * 100 ** (-0.2)
    assert bandwidth_silverman(x) == pytest.approx(expected, rel=1e-12)


def test_silverman_unit_spread_value():
    # rescale so that sd = 1 while IQR / 1.34 exceeds 1; the rule is then 0.9 * 100**-0.2
    x = np.random.default_rng(3).uniform(-1, 1, size=100)
    x = (x - x.mean()) / x.std(ddof=1)
    q25, q75 = np.percentile(x, [25, 75])
    assert (q75 - q25) / 1.34 > 1.0
    assert bandwidth_silverman(x) == pytest.approx(0.3582965, abs=1e-7)


def test_silverman_zero_spread():
    with pytest.raises(DegenerateSampleError):
        bandwidth_silverman(np.full(20, 3.0))


def test_sj_on_normal_sample():
    x = np.random.default_rng(2022).normal(size=1000)
    assert 0.25 <= bandwidth_sj(x) <= 0.50


def test_sj_scale_equivariance():
    x = np.random.default_rng(5).normal(size=400)
    h = bandwidth_sj(x)
    for c in (0.01, 3.0, 250.0):
        assert bandwidth_sj(c * x) == pytest.approx(c * h, rel=1e-6)


def test_sj_smaller_than_silverman_on_stepped():
    x = generate("stepped", 1000, seed=11).values
    assert bandwidth_sj(x) < bandwidth_silverman(x)


def test_sj_degenerate():
    with pytest.raises(DegenerateSampleError):
        bandwidth_sj(np.ones(50))


def test_kde_single_point_symmetric():
    est = fit_kde([0.0], bandwidth=1.0, grid_size=513)
    np.testing.assert_allclose(est.density, est.density[::-1], atol=1e-15)
    assert est.grid[np.argmax(est.density)] == pytest.approx(0.0, abs=1e-12)


def test_kde_normalized_and_nonnegative():
    x = np.random.default_rng(4).normal(size=300)
    est = fit_kde(x)
    assert trapezoid(est.density, est.grid) == pytest.approx(1.0, abs=1e-6)
    assert np.all(est.density >= 0)
    lo, hi = est.display_range
    assert lo == pytest.approx(x.min() - 3 * est.bandwidth)
    assert hi == pytest.approx(x.max() + 3 * est.bandwidth)


def test_kde_reflect_conserves_mass():
    x = np.random.default_rng(6).exponential(size=300)
    est = fit_kde(x, boundary="reflect", bounds=(0.0, None))
    assert est.display_range[0] == 0.0
    assert est.density[0] > 0
    assert trapezoid(est.density, est.grid) == pytest.approx(1.0, abs=1e-6)
    # before truncation to the display range the reflected mixture carries unit mass on [0, inf)
    hi = est.display_range[1]
    assert est._raw_cdf([hi])[0] - est._raw_cdf([0.0])[0] > 0.999


def test_kde_reflect_rejects_data_outside_bounds():
    with pytest.raises(ValueError):
        fit_kde([-0.1, 0.5, 1.0], bandwidth=0.2, boundary="reflect", bounds=(0.0, None))


def test_kde_auto_bounds_truncated_exponential():
    x = generate("bounded_exp", 1000, seed=7).values
    est = fit_kde(x, boundary="auto")
    lo, hi = est.bounds
    assert lo == pytest.approx(-np.log(0.9), abs=0.1)
    assert hi == pytest.approx(-np.log(0.1), abs=0.1)


def test_fd_width_formula():
    x = np.random.default_rng(8).normal(size=1000)
    q25, q75 = np.percentile(x, [25, 75])
    est = fit_histogram(x)
    assert est.bin_width == pytest.approx(2 * (q75 - q25) / 10, rel=1e-12)
    assert est.bin_width * est.densities.sum() == pytest.approx(1.0, abs=1e-12)
    widths = np.diff(est.edges)
    assert np.all(widths > 0)
    # interior widths are exact; outer edges may be nudged by rounding only
    assert np.max(np.abs(widths - est.bin_width)) <= 1e-12 * est.bin_width + 1e-15 * np.abs(est.edges).max()


def test_histogram_uniform_bins():
    x = np.random.default_rng(9).random(4000)
    est = fit_histogram(x, rule="bins", bins=4)
    assert est.bin_width * est.densities.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(est.densities, 1.0, atol=0.1)


def test_histogram_all_mass_in_one_bin():
    est = fit_histogram([0.1, 0.2, 0.3, 2.9], rule="width", width=1.0)
    est2 = fit_histogram(np.full(5, 0.5), rule="bins", bins=1)
    assert est2.densities[0] == pytest.approx(1.0 / est2.bin_width)
    assert est.densities[0] == pytest.approx(0.75 / est.bin_width)


def test_histogram_zero_iqr_fallback():
    x = np.concatenate([np.zeros(90), np.arange(1.0, 11.0)])
    est = fit_histogram(x)
    assert est.rule == "bins"
    assert "fd_zero_iqr_fallback_bins" in est.notes
    assert est.n_bins == int(np.ceil(np.sqrt(x.size)))


def test_qdot_single_dot_is_median():
    x = np.random.default_rng(10).normal(size=101)
    q = fit_qdot(x, n_q=1)
    assert q.centers.size == 1
    assert q.quantiles[0] == pytest.approx(np.median(x))


def test_qdot_equal_values_single_stack():
    q = fit_qdot(np.full(30, 2.5), n_q=20)
    assert q.stack_heights.tolist() == [20]
    assert q.stack_centers[0] == 2.5


def test_qdot_four_points():
    q = fit_qdot([1.0, 2.0, 3.0, 4.0], n_q=4, binwidth=0.5)
    # (k - 0.5)/4 type-7 quantiles of {1, 2, 3, 4}
    np.testing.assert_allclose(q.quantiles, [1.375, 2.125, 2.875, 3.625])
    assert q.stack_heights.tolist() == [1, 1, 1, 1]
    np.testing.assert_allclose(q.stack_centers, q.quantiles)


def test_qdot_dots_cover_their_quantiles():
    x = np.random.default_rng(12).gamma(2.0, size=500)
    q = fit_qdot(x, n_q=100)
    assert q.centers.size == 100
    assert np.all(np.abs(q.quantiles - q.centers) <= q.radius + 1e-12)


def test_lattice_stacking():
    stack_of, centers, heights = stack_dots_lattice(np.array([0.1, 0.2, 0.6, 1.55]), 0.5, 0.0)
    assert stack_of.tolist() == [0, 0, 1, 2]
    np.testing.assert_allclose(centers, [0.25, 0.75, 1.75])
    assert heights.tolist() == [2, 1, 1]


@pytest.mark.parametrize("a,b", [(2.5, -1.0), (0.1, 7.0), (-3.0, 0.5)])
def test_location_scale_equivariance(a, b):
    x = np.random.default_rng(13).normal(size=200)
    y = a * x + b
    s = abs(a)

    k1 = fit_kde(x, bandwidth=0.3)
    k2 = fit_kde(y, bandwidth=0.3 * s)
    grid_back = (k2.grid - b) / a
    order = np.argsort(grid_back)
    np.testing.assert_allclose(grid_back[order], k1.grid, rtol=0, atol=1e-9)
    np.testing.assert_allclose(k2.density[order] * s, k1.density, rtol=1e-9, atol=1e-12)

    if a > 0:
        h1 = fit_histogram(x)
        h2 = fit_histogram(y)
        np.testing.assert_allclose((h2.edges - b) / a, h1.edges, atol=1e-9)
        np.testing.assert_allclose(h2.densities * s, h1.densities, rtol=1e-9)
        q1 = fit_qdot(x, n_q=50)
        q2 = fit_qdot(y, n_q=50)
        np.testing.assert_allclose((q2.centers - b) / a, q1.centers, atol=1e-9)
        assert q2.stack_heights.tolist() == q1.stack_heights.tolist()
