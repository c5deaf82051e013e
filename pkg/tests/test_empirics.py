import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from interpoint import empirics as emp
from interpoint.densities import DensitySpec
from interpoint.distances import DistanceSpec
from interpoint.errors import InvalidParameter

# reference values from scripts/oracles.py
F_XX_SQRT2 = 0.68268949213708589717
F_XY_T1_MU1 = 0.42135039647485743467
POP_DELTA_K = {0.5: 0.059254410972602812948, 1.0: 0.22315484708446775031, 2.0: 0.7186948796737530557}

L1 = DistanceSpec.lp(1, 1)
GAUSS = DensitySpec.gaussian([0.0], [1.0])


# samples ---------------------------------------------------------------------------------


def test_generate_is_deterministic():
    a = emp.generate(GAUSS, 3, seed=42)
    b = emp.generate(GAUSS, 3, seed=42)
    np.testing.assert_array_equal(a.points, b.points)
    assert not np.array_equal(a.points, emp.generate(GAUSS, 3, seed=43).points)


def test_exponential_points_are_positive():
    s = emp.generate(DensitySpec.exponential([1.0, 1.0]), 10**4, seed=0)
    assert s.points.shape == (10**4, 2) and np.all(s.points > 0)


def test_uniform_sphere_resultant_is_small():
    s = emp.generate(DensitySpec.fisher(0.0), 10**4, seed=0)
    np.testing.assert_allclose(np.linalg.norm(s.points, axis=1), 1.0, atol=1e-12)
    assert np.linalg.norm(s.points.mean(axis=0)) < 0.05


def test_fisher_mean_direction():
    kappa = 5.0
    s = emp.generate(DensitySpec.fisher(kappa, (1.0, 0.0, 0.0)), 20_000, seed=1)
    # E<X, mu> = coth(kappa) - 1/kappa
    expected = 1 / math.tanh(kappa) - 1 / kappa
    assert s.points[:, 0].mean() == pytest.approx(expected, abs=0.01)


def test_sample_needs_two_points():
    with pytest.raises(InvalidParameter):
        emp.Sample(np.zeros((1, 1)))


# pairwise distances ------------------------------------------------------------------------


def test_within_pairs_l1():
    np.testing.assert_allclose(emp.pairwise_distances(L1, [0.0, 1.0, 3.0]), [1, 2, 3])


def test_between_pairs_canberra():
    d = emp.pairwise_distances(DistanceSpec.canberra(1), [1.0, 3.0], [2.0])
    np.testing.assert_allclose(d, [0.2, 1 / 3], rtol=1e-15)


def test_identical_pair():
    np.testing.assert_array_equal(emp.pairwise_distances(L1, [2.0, 2.0]), [0.0])


def test_asymmetric_within_pairs_use_both_orders():
    d = emp.pairwise_distances(DistanceSpec.entropic(1), [1.0, math.e])
    np.testing.assert_allclose(d, [math.e - 2, 1.0], rtol=1e-14)


@settings(max_examples=30)
@given(n=st.integers(2, 30), m=st.integers(2, 30), seed=st.integers(0, 1000))
def test_pair_counts(n, m, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random((n, 2)), rng.random((m, 2))
    spec = DistanceSpec.lp(2, 2)
    assert len(emp.pairwise_distances(spec, a)) == n * (n - 1) // 2
    assert len(emp.pairwise_distances(spec, a, b)) == n * m
    d = emp.pairwise_distances(spec, a, b)
    assert np.all(np.diff(d) >= 0)


# ECDFs --------------------------------------------------------------------------------------


def test_hand_ecdfs():
    tri = emp.ecdf_triple(L1, [0.0, 1.0], [0.0, 1.0], grid=[0.0, 0.5, 1.0, 1.5])
    np.testing.assert_array_equal(tri.f_xx, [0, 0, 0, 1])
    np.testing.assert_array_equal(tri.f_yy, [0, 0, 0, 1])
    np.testing.assert_array_equal(tri.f_xy, [0, 0.5, 0.5, 1])


def test_strict_inequality_at_atoms():
    d = np.array([1.0, 2.0, 2.0, 3.0])
    np.testing.assert_array_equal(emp.ecdf(d, [2.0, np.nextafter(2.0, 3.0)]), [0.25, 0.75])


@given(seed=st.integers(0, 10_000))
def test_ecdf_bounds_and_monotone(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(15, 2)), rng.normal(size=(12, 2))
    tri = emp.ecdf_triple(DistanceSpec.lp(2, 2), x, y)
    for f in (tri.f_xx, tri.f_yy, tri.f_xy):
        assert np.all((0 <= f) & (f <= 1)) and np.all(np.diff(f) >= 0)
    assert tri.f_xx[-1] == tri.f_yy[-1] == tri.f_xy[-1] == 1.0
    disc = emp.kolmogorov_discrepancy(tri)
    assert np.all(np.diff(disc.delta_k) >= 0)
    assert disc.delta_k_inf == pytest.approx(disc.delta_k[-1])


def test_same_multiset_gives_same_within_ecdf():
    x = np.array([[0.0], [1.0], [4.0]])
    tri = emp.ecdf_triple(L1, x, x[::-1])
    np.testing.assert_array_equal(tri.f_xx, tri.f_yy)


def test_grid_cap():
    rng = np.random.default_rng(0)
    grid = emp.default_grid(rng.random(10_000), cap=100)
    assert len(grid) <= 100 and np.all(np.diff(grid) > 0)


# discrepancy -----------------------------------------------------------------------------------


def test_discrepancy_zero_for_identical_curves():
    tri = emp.EcdfTriple(np.arange(3.0), *(np.array([0.1, 0.5, 1.0]),) * 3, (1, 1, 1))
    assert emp.kolmogorov_discrepancy(tri).delta_k_inf == 0.0


def test_discrepancy_hand_example():
    tri = emp.ecdf_triple(L1, [0.0, 1.0], [0.0, 1.0])
    assert emp.kolmogorov_discrepancy(tri).delta_k_inf == pytest.approx(1.0)
    d_xx = emp.pairwise_distances(L1, [0.0, 1.0])
    d_xy = emp.pairwise_distances(L1, [0.0, 1.0], [0.0, 1.0])
    assert emp.delta_k_exact(d_xx, d_xx, d_xy) == pytest.approx(1.0)


@given(seed=st.integers(0, 10_000))
def test_exact_discrepancy_dominates_grid_version(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(40, 1)), rng.normal(0.3, 1, size=(35, 1))
    spec = DistanceSpec.lp(2, 1)
    d_xx, d_yy, d_xy = (emp.pairwise_distances(spec, *a) for a in ((x,), (y,), (x, y)))
    exact = emp.delta_k_exact(d_xx, d_yy, d_xy)
    thinned = emp.kolmogorov_discrepancy(emp.ecdf_triple_from_distances(d_xx, d_yy, d_xy, cap=64)).delta_k_inf
    full = emp.kolmogorov_discrepancy(emp.ecdf_triple_from_distances(d_xx, d_yy, d_xy, cap=None)).delta_k_inf
    assert thinned <= exact + 1e-15
    assert full == pytest.approx(exact, abs=1e-15)


# closed forms ---------------------------------------------------------------------------------


def test_closed_form_values():
    model = emp.GaussianPairModel(1.0, 1.0, 1.0, 1)
    assert emp.closed_form_distance_cdf(model, math.sqrt(2), "xx") == pytest.approx(F_XX_SQRT2, abs=1e-12)
    assert emp.closed_form_distance_cdf(model, 1.0, "xy") == pytest.approx(F_XY_T1_MU1, abs=1e-12)
    assert emp.closed_form_distance_cdf(model, 0.0, "xy") == 0.0
    far = emp.GaussianPairModel(1.0, 1.0, 1e3, 1)
    assert emp.closed_form_distance_cdf(far, 5.0, "xy") == 0.0


def test_closed_form_multivariate_matches_simulation():
    model = emp.GaussianPairModel(1.0, 1.5, 0.8, 3)
    rng = np.random.default_rng(3)
    u = rng.normal(size=(200_000, 3))
    v = 1.5 * rng.normal(size=(200_000, 3)) + np.array([0.8, 0, 0])
    d = np.linalg.norm(u - v, axis=1)
    for t in (0.5, 2.0, 4.0):
        p = float(np.mean(d < t))
        assert model.cdf("xy", t) == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / len(d)) + 1e-9)


@pytest.mark.parametrize("mu", sorted(POP_DELTA_K))
def test_population_delta_k_matches_oracle(mu):
    model = emp.GaussianPairModel(1.0, 1.0, mu, 1)
    assert emp.population_delta_k(model) == pytest.approx(POP_DELTA_K[mu], rel=1e-9)


def test_population_delta_k_is_zero_without_shift():
    assert emp.population_delta_k(emp.GaussianPairModel(1.0, 1.0, 0.0, 2)) == 0.0


def test_empirical_ecdf_agrees_with_closed_form():
    n = 400
    x = emp.generate(GAUSS, n, seed=5)
    tri = emp.ecdf_triple(DistanceSpec.lp(2, 1), x, emp.generate(GAUSS, n, seed=6))
    exact = emp.GaussianPairModel(1.0, 1.0, 0.0, 1).cdf("xx", tri.grid)
    assert np.max(np.abs(tri.f_xx - exact)) <= 2 * 1.36 / math.sqrt(n)


@pytest.mark.parametrize("n", [200, 800])
def test_forward_direction_shrinks(n):
    spec = DistanceSpec.lp(2, 1)
    for seed in range(3):
        x, y = emp.generate(GAUSS, n, 2 * seed), emp.generate(GAUSS, n, 2 * seed + 1)
        d = [emp.pairwise_distances(spec, *a) for a in ((x,), (y,), (x, y))]
        assert emp.delta_k_exact(*d) <= 5 / math.sqrt(n)


# permutation test ---------------------------------------------------------------------------------


def test_permutation_needs_enough_permutations():
    with pytest.raises(InvalidParameter):
        emp.permutation_test(L1, [0.0, 1.0], [2.0, 3.0], B=10)


def test_permutation_is_deterministic_and_add_one():
    x, y = emp.generate(GAUSS, 20, 0), emp.generate(GAUSS, 20, 1)
    a = emp.permutation_test(DistanceSpec.lp(2, 1), x, y, B=99, seed=3)
    b = emp.permutation_test(DistanceSpec.lp(2, 1), x, y, B=99, seed=3)
    assert a == b
    assert 1 / 100 <= a.p_value <= 1 and (a.p_value * 100) == pytest.approx(round(a.p_value * 100))


def test_cvm_statistic_zero_when_curves_coincide():
    d = np.array([1.0, 2.0, 3.0])
    assert emp.statistic(emp.CRAMER_VON_MISES, d, d, d) == 0.0


def test_null_level_and_uniform_p_values():
    spec = DistanceSpec.lp(2, 1)
    p = []
    for rep in range(500):
        x, y = emp.generate(GAUSS, 50, 2 * rep), emp.generate(GAUSS, 50, 2 * rep + 1)
        p.append(emp.permutation_test(spec, x, y, B=199, seed=rep).p_value)
    p = np.array(p)
    assert 0.03 <= np.mean(p <= 0.05) <= 0.07
    assert stats.kstest(p, "uniform").statistic <= 0.1


def test_copied_sample_is_not_rejected():
    spec = DistanceSpec.lp(2, 1)
    p = [emp.permutation_test(spec, x, x, B=199, seed=s).p_value
         for s in range(40) for x in [emp.generate(GAUSS, 50, 100 + s)]]
    assert np.mean(np.array(p) > 0.05) >= 0.95


def test_power_increases_with_shift():
    spec = DistanceSpec.canberra(1)
    base = DensitySpec.gaussian([5.0], [1.0])
    power = []
    for mu in (0.0, 1.0, 2.0):
        rejections = 0
        for rep in range(200):
            x = emp.generate(base, 12, 3 * rep)
            y = emp.generate(base.shifted(mu), 12, 3 * rep + 1)
            rejections += emp.permutation_test(spec, x, y, B=99, seed=rep).p_value <= 0.05
        power.append(rejections / 200)
    assert power[0] < power[1] < power[2]


def test_strong_shift_is_detected():
    spec = DistanceSpec.lp(2, 1)
    p = [emp.permutation_test(spec, emp.generate(GAUSS, 100, 2 * s),
                              emp.generate(GAUSS.shifted(2.0), 100, 2 * s + 1), B=199, seed=s).p_value
         for s in range(30)]
    assert np.mean(np.array(p) < 0.05) >= 0.9


@pytest.mark.parametrize("kind", ["sup", "cvm"])
def test_sphere_alternative_detected(kind):
    spec = DistanceSpec.sphere()
    x = emp.generate(DensitySpec.fisher(0.0), 60, 1)
    y = emp.generate(DensitySpec.fisher(8.0), 60, 2)
    assert emp.permutation_test(spec, x, y, kind=kind, B=199, seed=0).p_value < 0.05
