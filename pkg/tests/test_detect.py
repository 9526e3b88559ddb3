import numpy as np
import pytest

from ppcheck.detect import bound_pvalue, detect_bounds, detect_discrete, diagnose
from ppcheck.synthetic import generate


def test_all_unique_not_discrete():
    d = detect_discrete(np.random.default_rng(0).normal(size=500))
    assert not d.discrete_flag
    assert d.point_mass_values == ()
    assert d.n_unique == 500


def test_point_mass_mixture_lists_one():
    d = detect_discrete(generate("point_mass", 1000, seed=3))
    assert d.discrete_flag
    assert d.point_mass_values == (1.0,)
    assert 0.15 < d.max_rel_freq < 0.25


def test_repeated_counts_flagged():
    x = np.tile(np.arange(6.0), 1000 // 6 + 1)[:1000]
    d = detect_discrete(x)
    assert d.discrete_flag
    assert d.point_mass_values == (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)


def test_discrete_flag_implies_repeats():
    for seed in range(20):
        x = np.round(np.random.default_rng(seed).normal(size=200), 1)
        d = detect_discrete(x)
        if d.discrete_flag:
            assert d.max_rel_freq > 0.02 and d.n_unique < d.n


def test_normal_has_no_bounds():
    clean = 0
    for seed in range(100):
        lo, hi = detect_bounds(np.random.default_rng(seed).normal(size=1000))
        clean += lo is None and hi is None
    assert clean >= 90


def test_truncated_exponential_bounds():
    ok = 0
    for seed in range(100):
        lo, hi = detect_bounds(generate("bounded_exp", 1000, seed=seed))
        ok += (
            lo is not None
            and hi is not None
            and abs(lo + np.log(0.9)) <= 0.05
            and abs(hi + np.log(0.1)) <= 0.05
        )
    assert ok >= 90


def test_small_uniform_sample_bounded_both_sides():
    both = 0
    for seed in range(200):
        lo, hi = detect_bounds(np.random.default_rng(seed).random(10))
        both += lo is not None and hi is not None
    assert both / 200 >= 0.9


def test_bounds_need_ten_points():
    with pytest.raises(ValueError):
        detect_bounds(np.arange(9.0))
    assert diagnose(np.arange(9.0)).left_bound is None


@pytest.mark.parametrize("a,b", [(3.0, 1.0), (0.01, -5.0)])
def test_bounds_affine_equivariance(a, b):
    for seed in range(10):
        x = generate("bounded_exp", 300, seed=seed).values
        lo, hi = detect_bounds(x)
        lo2, hi2 = detect_bounds(a * x + b)
        assert (lo is None) == (lo2 is None) and (hi is None) == (hi2 is None)
        if lo is not None:
            assert lo2 == pytest.approx(a * lo + b)
        if hi is not None:
            assert hi2 == pytest.approx(a * hi + b)


def test_reflection_swaps_sides():
    x = np.random.default_rng(1).exponential(size=400)
    lo, hi = detect_bounds(x)
    lo2, hi2 = detect_bounds(-x)
    assert (lo is None) == (hi2 is None) and (hi is None) == (lo2 is None)


def test_permutation_invariance():
    x = generate("bounded_exp", 500, seed=2).values
    y = np.random.default_rng(0).permutation(x)
    assert detect_bounds(x) == detect_bounds(y)
    assert detect_discrete(x) == detect_discrete(y)


def test_bound_pvalue_extremes():
    # equal gaps look like a flat density at a bound
    assert bound_pvalue(np.arange(31.0)) >= 0.5
    # gaps shrinking away from the extreme look like a thinning tail
    tail = np.concatenate([[0.0], np.cumsum(0.8 ** np.arange(30.0))])
    assert bound_pvalue(tail) < 0.025
    assert bound_pvalue(np.zeros(31)) == 1.0
