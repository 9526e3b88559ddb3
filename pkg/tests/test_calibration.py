from fractions import Fraction

import numpy as np
import pytest
from oracles import isotonic_by_partitions

from ppcheck.data import BinaryPredictionTable, CategoricalPredictionTable, DataError
from ppcheck.calibration import (
    bar_check,
    binned_calibration,
    clopper_pearson,
    cumulative_ordinal_calibration,
    ovo_calibration,
    pav_calibration_plot,
    pav_isotonic,
    pav_residuals,
)
from ppcheck.rootogram import count_frequencies


def slope(curve):
    x = curve.fit.sorted_pred
    return np.polyfit(x, curve.y, 1)[0]


def test_pav_examples():
    np.testing.assert_array_equal(pav_isotonic([0.1, 0.2, 0.3, 0.4], [0, 0, 1, 1]).cep, [0, 0, 1, 1])
    np.testing.assert_array_equal(pav_isotonic([0.1, 0.4, 0.6, 0.9], [0, 1, 0, 1]).cep, [0, 0.5, 0.5, 1])
    np.testing.assert_array_equal(pav_isotonic([0.3, 0.1, 0.8], [1, 1, 1]).cep, [1, 1, 1])


def test_pav_matches_partition_oracle_with_ties():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 8))
        pred = rng.choice([0.1, 0.3, 0.5, 0.7, 0.9], size=n)
        y = rng.integers(0, 2, size=n)
        fit = pav_isotonic(pred, y)
        want = [float(v) for v in isotonic_by_partitions(pred, y)]
        assert fit.cep_in_input_order().tolist() == want
        assert fit.exact_mean() == Fraction(int(y.sum()), n)


def test_pav_properties():
    rng = np.random.default_rng(1)
    pred = rng.random(300)
    y = (rng.random(300) < pred).astype(int)
    fit = pav_isotonic(pred, y)
    assert np.all(np.diff(fit.cep) >= 0)
    assert np.all((fit.cep >= 0) & (fit.cep <= 1))
    for b in range(fit.n_blocks):
        members = fit.block_index == b
        assert fit.cep[members][0] == y[fit.order][members].mean()
    # permutation and strictly monotone transforms of pred leave the fit unchanged
    perm = rng.permutation(300)
    assert np.array_equal(pav_isotonic(pred[perm], y[perm]).cep_in_input_order(), fit.cep_in_input_order()[perm])
    assert np.array_equal(pav_isotonic(pred**3, y).cep_in_input_order(), fit.cep_in_input_order())


def test_pav_rejects_bad_outcomes():
    with pytest.raises(DataError):
        pav_isotonic([0.1, 0.2], [0, 2])


def test_binned_degenerate_cases():
    c = binned_calibration(BinaryPredictionTable(np.full(10, 0.5), [1, 0] * 5))
    assert c.x.tolist() == [0.5] and c.y.tolist() == [0.5]
    c = binned_calibration(BinaryPredictionTable([0, 0, 1, 1, 1], [0, 0, 1, 1, 1]))
    assert c.x.tolist() == [0, 1] and c.y.tolist() == [0, 1]


def test_clopper_pearson_single_success():
    c = binned_calibration(BinaryPredictionTable([0.7], [1]))
    assert c.y.tolist() == [1.0]
    assert c.lo[0] == pytest.approx(0.025, abs=1e-12) and c.hi[0] == 1.0
    lo, hi = clopper_pearson(0, 1)
    assert lo == 0.0 and hi == pytest.approx(0.975)


def test_intercept_only_collapses():
    y = np.random.default_rng(2).integers(0, 2, 200)
    c = pav_calibration_plot(BinaryPredictionTable(np.full(200, 0.3), y), n_sim=200)
    assert np.unique(c.x).tolist() == [0.3]
    assert np.unique(c.y).tolist() == [y.mean()]


def test_inverted_outcomes_flagged():
    rng = np.random.default_rng(3)
    p = rng.random(500)
    y = (rng.random(500) < p).astype(int)
    c = pav_calibration_plot(BinaryPredictionTable(p, 1 - y), seed=1)
    assert c.n_flagged > 0


def test_bands_from_supplied_draws():
    rng = np.random.default_rng(4)
    p = rng.random(100)
    y = (rng.random(100) < p).astype(int)
    draws = (rng.random((300, 100)) < p).astype(int)
    c = pav_calibration_plot(BinaryPredictionTable(p, y, predictive_outcome_draws=draws))
    assert c.bands.source == "draws" and c.bands.draws_used == 300
    assert np.all(c.lo <= c.hi)


def test_consistency_bands_deterministic():
    rng = np.random.default_rng(5)
    p = rng.random(80)
    t = BinaryPredictionTable(p, (rng.random(80) < p).astype(int))
    a = pav_calibration_plot(t, seed=9, n_sim=300)
    b = pav_calibration_plot(t, seed=9, n_sim=300)
    assert a.lo.tobytes() == b.lo.tobytes() and a.hi.tobytes() == b.hi.tobytes()


def test_residuals_zero_when_cep_equals_pred():
    pred = [0.25] * 4 + [0.5] * 2 + [0.75] * 4
    y = [1, 0, 0, 0, 1, 0, 1, 1, 1, 0]
    t = BinaryPredictionTable(pred, y, covariates={"x": np.arange(10.0)})
    plot = pav_residuals(t, "x", n_sim=100)
    np.testing.assert_allclose(plot.data["residual"], 0.0, atol=1e-15)


def test_residuals_show_low_covariate_overestimation():
    rng = np.random.default_rng(6)
    x = rng.random(1000)
    pred = 0.1 + 0.8 * x
    true = np.where(x < 0.3, pred - 0.25, pred)
    y = (rng.random(1000) < np.clip(true, 0, 1)).astype(int)
    plot = pav_residuals(BinaryPredictionTable(pred, y), x, n_sim=300)
    cov = np.array(plot.data["covariate"])
    res = np.array(plot.data["residual"])
    assert res[cov < 0.25].mean() < -0.1
    assert abs(res[cov > 0.5].mean()) < 0.05


def test_ovo_complement_symmetry():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(1, 9))
        p1 = rng.choice([0.1, 0.25, 0.5, 0.75, 0.9], size=n)
        y = rng.integers(1, 3, size=n)
        curves = ovo_calibration(CategoricalPredictionTable(np.column_stack([p1, 1 - p1]), y), n_sim=20)
        a = curves[0].fit.cep_in_input_order()
        b = curves[1].fit.cep_in_input_order()
        np.testing.assert_allclose(b, 1 - a, atol=1e-12)


def test_ovo_one_hot_perfect():
    y = np.array([1, 2, 3, 1, 2, 3])
    P = np.eye(3)[y - 1]
    for c in ovo_calibration(CategoricalPredictionTable(P, y), n_sim=50):
        assert sorted(set(zip(c.x.tolist(), c.y.tolist()))) == [(0.0, 0.0), (1.0, 1.0)]


def _simulate(P, rng):
    return 1 + (rng.random(P.shape[0])[:, None] > np.cumsum(P, axis=1)[:, :-1]).sum(axis=1)


def test_ovo_confused_classes():
    rng = np.random.default_rng(8)
    P = rng.dirichlet([0.3, 0.3, 0.3], size=3000)
    y = _simulate(P, rng)
    swap = (y > 1) & (rng.random(3000) < 0.5)
    y[swap] = 5 - y[swap]
    curves = ovo_calibration(CategoricalPredictionTable(P, y), n_sim=200)
    s = [slope(c) for c in curves]
    assert s[0] > 0.85
    assert s[1] < 0.75 and s[2] < 0.75


def test_ordinal_binary_reduction():
    rng = np.random.default_rng(9)
    p = rng.random(60)
    y = np.where(rng.random(60) < p, 1, 2)
    (c,) = cumulative_ordinal_calibration(CategoricalPredictionTable(np.column_stack([p, 1 - p]), y, ordered=True), seed=4, n_sim=200)
    b = pav_calibration_plot(BinaryPredictionTable(p, y == 1), seed=4, n_sim=200)
    for f in ("x", "y", "lo", "hi", "outside_flags"):
        assert getattr(c, f).tobytes() == getattr(b, f).tobytes()


def test_ordinal_requires_order():
    with pytest.raises(DataError):
        cumulative_ordinal_calibration(CategoricalPredictionTable([[0.5, 0.5]], [1]))


def test_ordinal_under_confidence_is_steep():
    rng = np.random.default_rng(10)
    P = rng.dirichlet([0.5] * 4, size=3000)
    y = _simulate(P, rng)
    shrunk = 0.5 * P + 0.5 / 4
    curves = cumulative_ordinal_calibration(CategoricalPredictionTable(shrunk, y, ordered=True), n_sim=200)
    assert all(slope(c) > 1.3 for c in curves)


@pytest.mark.slow
def test_calibrated_ordinal_within_bands():
    inside = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        P = rng.dirichlet(np.ones(3), size=100)
        t = CategoricalPredictionTable(P, _simulate(P, rng), ordered=True)
        inside += all(c.n_flagged == 0 for c in cumulative_ordinal_calibration(t, seed=seed))
    print(f"calibrated ordinal data fully inside the bands in {inside}/20 seeds")
    assert inside >= 17


def test_bar_check_identity_draws():
    y = np.array([0, 1, 1, 0, 1])
    t = BinaryPredictionTable(np.full(5, 0.6), y, predictive_outcome_draws=np.tile(y, (10, 1)))
    plot = bar_check(t)
    assert plot.data["lo"] == plot.data["observed"] == plot.data["hi"]


def test_bar_check_intercept_model_passes():
    rng = np.random.default_rng(11)
    y = rng.integers(1, 4, size=600)
    freq = np.bincount(y, minlength=4)[1:] / 600
    plot = bar_check(CategoricalPredictionTable(np.tile(freq, (600, 1)), y))
    assert plot.data["flags"] == []


def test_bar_check_unpredicted_category():
    P = np.tile([0.5, 0.5, 0.0], (50, 1))
    y = np.tile([1, 2], 25)
    plot = bar_check(CategoricalPredictionTable(P, y), n_sim=100)
    assert plot.data["mean"][2] == 0.0


def test_bar_check_counts():
    rng = np.random.default_rng(12)
    t = count_frequencies(rng.poisson(2, 40), rng.poisson(2, (50, 40)))
    plot = bar_check(t)
    assert plot.data["categories"] == t.counts.tolist()
