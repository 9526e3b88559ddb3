import numpy as np
import pytest

from ppcheck.plotspec import sqrt_ticks
from ppcheck.rootogram import (
    NonCountDataError,
    RootogramSpec,
    count_frequencies,
    rootogram,
    rootogram_geometry,
)


def test_small_table():
    t = count_frequencies([0, 0, 1], np.tile([0, 0, 1], (5, 1)))
    assert t.observed_freq.tolist() == [2, 1]
    lo, hi = t.interval
    assert lo.tolist() == [2, 1] and hi.tolist() == [2, 1]


def test_non_count_rejected():
    with pytest.raises(NonCountDataError):
        count_frequencies([0, 2.5], np.zeros((3, 2)))
    with pytest.raises(NonCountDataError):
        count_frequencies([0, 1], -np.ones((3, 2)))


def test_c_max_folds_tail():
    t = count_frequencies([0, 1, 2], np.array([[0, 5, 9], [1, 1, 2]]), c_max=3)
    assert t.counts.tolist() == [0, 1, 2, 3]
    assert t.predictive_freq[0].tolist() == [1, 0, 0, 2]
    with pytest.raises(ValueError):
        count_frequencies([0, 1, 4], np.zeros((2, 3)), c_max=3)


@pytest.mark.slow
def test_poisson_interval_coverage():
    hits = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        t = count_frequencies(rng.poisson(3, 500), rng.poisson(3, (1000, 500)))
        hits += not t.outside()[3]
    assert 0.84 <= hits / 200 <= 0.96


def test_identity_draws_geometry():
    obs = np.random.default_rng(1).poisson(2, 100)
    t = count_frequencies(obs, np.tile(obs, (4, 1)))
    hang = rootogram_geometry(t, "hanging")
    susp = rootogram_geometry(t, "suspended")
    np.testing.assert_array_equal(hang["y0"], 0.0)
    np.testing.assert_array_equal(susp["y1"], 0.0)
    assert rootogram(t).data["flags"] == []


def test_style_relations():
    rng = np.random.default_rng(2)
    t = count_frequencies(rng.poisson(2, 200), rng.poisson(2.4, (300, 200)))
    hang = rootogram_geometry(t, "hanging")
    susp = rootogram_geometry(t, "suspended")
    stand = rootogram_geometry(t, "standing")
    np.testing.assert_allclose(hang["y0"] + susp["y1"], 0.0, atol=1e-12)
    np.testing.assert_allclose(hang["y1"] - hang["y0"], stand["y1"], atol=1e-12)
    np.testing.assert_allclose(hang["y1"], np.sqrt(t.predictive_mean))
    raw = rootogram_geometry(t, "suspended", scale="raw")
    np.testing.assert_allclose(raw["y1"], t.observed_freq - t.predictive_mean)


def test_sqrt_axis_places_nine_at_three():
    pos, labels = sqrt_ticks(0.0, 4.0)
    at = dict(zip(labels, pos))
    assert at["9"] == pytest.approx(3.0)
    assert at["1"] == pytest.approx(1.0)


def test_zero_inflation_flagged_at_zero():
    rng = np.random.default_rng(3)
    obs = rng.poisson(3, 500)
    obs[rng.random(500) < 0.3] = 0
    t = count_frequencies(obs, rng.poisson(3, (1000, 500)), interval_mass=0.95)
    plot = rootogram(t, RootogramSpec(interval_mass=0.95))
    assert 0 in plot.data["flags"]


def test_flags_are_exactly_outside():
    rng = np.random.default_rng(4)
    t = count_frequencies(rng.poisson(4, 300), rng.poisson(3.5, (500, 300)))
    lo, hi = t.interval
    expected = [int(c) for c in t.counts if not lo[c] <= t.observed_freq[c] <= hi[c]]
    assert rootogram(t).data["flags"] == expected


@pytest.mark.parametrize("style", ["standing", "hanging", "suspended", "discrete"])
def test_every_style_renders(style):
    rng = np.random.default_rng(5)
    t = count_frequencies(rng.poisson(2, 50), rng.poisson(2, (40, 50)))
    plot = rootogram(t, RootogramSpec(style=style))
    assert plot.data["style"] == style
    assert plot.layers
