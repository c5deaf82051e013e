import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from interpoint.densities import DensitySpec
from interpoint.errors import InvalidParameter
from interpoint.montecarlo import chunk_sizes, map_chunks, substream
from interpoint.quadrature import composite_rule, integrate_box, integrate_sphere

EUCLIDEAN_FAMILIES = [
    DensitySpec.gaussian([0.5, -1.0], [0.5, 2.0]),
    DensitySpec.exponential([1.0, 3.0]),
    DensitySpec.lognormal([0.0, 0.3], [0.4, 0.6]),
]


@pytest.mark.parametrize("f", EUCLIDEAN_FAMILIES, ids=lambda d: d.family)
def test_densities_integrate_to_one(f):
    lower, upper = f.default_box()
    total = integrate_box(f, lower, upper, 128)
    assert total == pytest.approx(1.0, abs=2e-6)


@pytest.mark.parametrize("kappa", [0.0, 0.5, 4.0, 50.0])
def test_fisher_normalizer(kappa):
    f = DensitySpec.fisher(kappa)
    assert integrate_sphere(f, 64) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("f", EUCLIDEAN_FAMILIES + [DensitySpec.fisher(3.0, (0, 1, 0))], ids=lambda d: d.family)
def test_round_trip_and_sampling_domain(f):
    assert DensitySpec.from_dict(f.to_dict()) == f
    pts = f.sample(1000, 3)
    assert pts.shape == (1000, f.dim)
    if f.domain == "positive_orthant":
        assert np.all(pts > 0)


@pytest.mark.parametrize("f", EUCLIDEAN_FAMILIES, ids=lambda d: d.family)
def test_sup_bounds_pdf(f):
    pts = f.sample(20_000, 0)
    assert np.max(f(pts)) <= f.sup() * (1 + 1e-12)


def test_gaussian_sample_moments():
    f = DensitySpec.gaussian([1.0, -2.0], [4.0, 0.25])
    pts = f.sample(100_000, 1)
    np.testing.assert_allclose(pts.mean(axis=0), [1.0, -2.0], atol=0.02)
    np.testing.assert_allclose(pts.var(axis=0), [4.0, 0.25], rtol=0.02)


def test_shifted_moves_first_axis():
    f = DensitySpec.gaussian([0.0, 0.0], [1.0, 1.0]).shifted(2.0)
    assert f.loc == (2.0, 0.0)


def test_gaussian_lipschitz():
    f = DensitySpec.gaussian([0.0], [1.0])
    xs = np.linspace(-5, 5, 100_001)[:, None]
    slope = np.max(np.abs(np.diff(f(xs)))) / (xs[1, 0] - xs[0, 0])
    assert f.lipschitz() == pytest.approx(slope, rel=1e-6)


def test_invalid_densities():
    with pytest.raises(InvalidParameter):
        DensitySpec.gaussian([0.0], [-1.0])
    with pytest.raises(InvalidParameter):
        DensitySpec.fisher(1.0, (1.0, 1.0, 0.0))


def test_marginal_tails():
    f = DensitySpec.exponential([2.0])
    np.testing.assert_allclose(f.marginal_sf_outside([0.0], [1.0]), [math.exp(-2.0)])


# quadrature -----------------------------------------------------------------------------


@given(deg=st.integers(0, 15), a=st.floats(-3, 0), b=st.floats(0.1, 3))
def test_gauss_legendre_exact_for_polynomials(deg, a, b):
    nodes, weights = composite_rule(a, b, 3)
    exact = (b ** (deg + 1) - a ** (deg + 1)) / (deg + 1)
    assert float(weights @ nodes**deg) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_tensor_rule_separable_integrand():
    value = integrate_box(lambda p: np.exp(-np.sum(p**2, axis=1)), [-6, -6, -6], [6, 6, 6], 16, block=1000)
    assert value == pytest.approx(math.pi**1.5, rel=1e-12)


def test_sphere_area():
    assert integrate_sphere(lambda p: np.ones(len(p)), 16) == pytest.approx(4 * math.pi, rel=1e-13)


# Monte Carlo plumbing -------------------------------------------------------------------------


def test_substreams_are_reproducible_and_distinct():
    a = substream(5, 1, 2).random(4)
    np.testing.assert_array_equal(a, substream(5, 1, 2).random(4))
    assert not np.array_equal(a, substream(5, 1, 3).random(4))
    assert not np.array_equal(a, substream(6, 1, 2).random(4))


def test_negative_seed_is_accepted():
    assert substream(-1).random() == substream(2**64 - 1).random()


@given(n=st.integers(1, 300_000))
def test_chunk_sizes_cover_n(n):
    sizes = chunk_sizes(n)
    assert sum(sizes) == n and all(0 < s <= 1 << 16 for s in sizes)


def test_map_chunks_thread_independent():
    def work(rng, size):
        return rng.random(size).sum()

    assert map_chunks(work, 300_000, 1, threads=1) == map_chunks(work, 300_000, 1, threads=4)
