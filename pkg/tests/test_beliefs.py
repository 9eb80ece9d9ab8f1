import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from objexplore.beliefs import (
    CategoricalBelief,
    ContinuousBelief,
    GaussianMixture,
    Grid,
    IncompatibleMeasurement,
    differential_entropy,
    discrete_entropy,
    discretize,
    gaussian_likelihood,
    mixture_from_pmf,
    multiply_likelihood,
    uniform_categorical,
)

FINE = Grid(0.0, 200.0, 1024)


def gaussian(mean, sd, grid=FINE):
    return discretize(GaussianMixture([mean], [sd], [1.0]), grid)


def analytic_entropy_bits(sd):
    return 0.5 * math.log2(2 * math.pi * math.e * sd**2)


def test_uniform_categorical(tables):
    cat = uniform_categorical(tables.category_labels)
    assert np.allclose(cat.probs, 0.1)
    assert np.allclose(uniform_categorical(tables.material_labels).probs, 0.125)
    assert discrete_entropy(cat) == pytest.approx(math.log2(10), abs=1e-12)
    with pytest.raises(ValueError):
        uniform_categorical([])


@pytest.mark.parametrize(
    "probs, bits",
    [([0.1] * 10, 3.321928094887362), ([0, 1, 0], 0.0), ([0.5, 0.5], 1.0)],
)
def test_discrete_entropy(probs, bits):
    assert discrete_entropy(probs) == pytest.approx(bits, abs=1e-4)


def test_categorical_invariants():
    with pytest.raises(ValueError):
        CategoricalBelief(("a", "b"), [0.5, 0.6])
    with pytest.raises(ValueError):
        CategoricalBelief(("a", "b"), [1.5, -0.5])
    with pytest.raises(ValueError):
        CategoricalBelief(("a",), [0.5, 0.5])


def test_mixture_from_pmf(tables):
    comps = {lab: tuple(row) for lab, row in zip(tables.material_labels, tables.density_by_material)}
    gmm = mixture_from_pmf(uniform_categorical(tables.material_labels), comps)
    assert np.allclose(gmm.weights, 0.125)
    assert gmm.component_means[2] == 7900.0

    onehot = np.zeros(8)
    onehot[2] = 1.0
    gmm = mixture_from_pmf(CategoricalBelief(tables.material_labels, onehot), comps)
    active = np.flatnonzero(gmm.weights)
    assert list(active) == [2]
    assert (gmm.component_means[2], gmm.component_sds[2]) == (7900.0, 600.0)

    half = np.zeros(8)
    half[:2] = 0.5
    gmm = mixture_from_pmf(CategoricalBelief(tables.material_labels, half), comps)
    assert np.array_equal(gmm.weights, half)

    with pytest.raises(ValueError, match="do not match"):
        mixture_from_pmf(uniform_categorical(tables.category_labels), comps)


def test_discretize_gaussian():
    pdf = discretize(GaussianMixture([100.0], [10.0], [1.0]), Grid(0, 200, 1024))
    assert pdf.density.sum() * pdf.grid.bin_width == pytest.approx(1.0, abs=1e-6)
    assert abs(pdf.mode() - 100.0) <= pdf.grid.bin_width
    assert np.array_equal(pdf.likelihood_product, np.ones(1024))


def test_discretize_truncates_at_zero():
    # plate volume 0 +- 15: only the positive half survives, renormalized.
    grid = Grid(0, 400, 1024)
    pdf = discretize(GaussianMixture([0.0], [15.0], [1.0]), grid)
    assert pdf.density.sum() * grid.bin_width == pytest.approx(1.0, abs=1e-6)
    # half-normal: density at 0+ is 2 * N(0; 0, 15)
    assert pdf.density[0] == pytest.approx(2 / (15 * math.sqrt(2 * math.pi)), rel=1e-3)
    assert pdf.mean() == pytest.approx(15 * math.sqrt(2 / math.pi), rel=1e-3)


def test_discretize_outside_grid():
    with pytest.raises(ValueError, match="grid does not cover mixture"):
        discretize(GaussianMixture([5000.0], [10.0], [1.0]), FINE)


@pytest.mark.parametrize("sd, expected", [(10.0, 5.3706), (math.sqrt(200), 5.8706)])
def test_differential_entropy_gaussian(sd, expected):
    # the quoted constants sit 0.0016 above the closed form; both are checked
    h = differential_entropy(gaussian(100.0, sd))
    assert h == pytest.approx(expected, abs=0.02)
    assert h == pytest.approx(analytic_entropy_bits(sd), abs=0.02)


def test_differential_entropy_uniform():
    grid = Grid(0.0, 50.0, 100)
    pdf = ContinuousBelief(grid, np.full(100, 1 / 50.0))
    assert differential_entropy(pdf) == pytest.approx(math.log2(50.0), abs=1e-12)
    # may be negative for narrow supports
    narrow = Grid(0.0, 0.5, 64)
    assert differential_entropy(ContinuousBelief(narrow, np.full(64, 2.0))) == pytest.approx(-1.0)


def test_multiply_uniform_by_gaussian():
    grid = FINE
    prior = ContinuousBelief(grid, np.full(grid.bins, 1 / 200.0))
    post = multiply_likelihood(prior, gaussian_likelihood(grid, 80.0, 7.0))
    assert np.allclose(post.density, gaussian(80.0, 7.0).density, atol=1e-9)


def test_multiply_conjugate_product():
    m1, s1, m2, s2 = 90.0, 12.0, 110.0, 9.0
    post = multiply_likelihood(gaussian(m1, s1), gaussian_likelihood(FINE, m2, s2))
    prec = 1 / s1**2 + 1 / s2**2
    assert post.mean() == pytest.approx((m1 / s1**2 + m2 / s2**2) / prec, abs=0.01)
    assert post.sd() == pytest.approx(math.sqrt(1 / prec), rel=1e-3)


def test_multiply_disjoint_support():
    grid = FINE
    x = grid.centers
    prior = np.where(x <= 100, 1.0, 0.0)
    prior = ContinuousBelief(grid, prior / (prior.sum() * grid.bin_width))
    lik = np.where((x >= 150) & (x <= 200), 1.0, 0.0)
    with pytest.raises(IncompatibleMeasurement, match="measurement incompatible with belief"):
        multiply_likelihood(prior, lik)


def test_grid_invariants():
    with pytest.raises(ValueError):
        Grid(10, 5, 128)
    with pytest.raises(ValueError):
        Grid(0, 1, 32)
    assert Grid(0, 200, 1024).bin_width == pytest.approx(200 / 1024)


# --- properties -------------------------------------------------------------

simplex = st.lists(st.floats(0.0, 1.0), min_size=2, max_size=12).filter(lambda v: sum(v) > 1e-3)


@given(simplex)
def test_uniform_maximizes_entropy(raw):
    p = np.array(raw) / sum(raw)
    assert discrete_entropy(p) <= math.log2(len(p)) + 1e-12


@given(simplex)
def test_from_unnormalized_sums_to_one(raw):
    labels = tuple(str(i) for i in range(len(raw)))
    assert abs(CategoricalBelief.from_unnormalized(labels, raw).probs.sum() - 1) < 1e-9


@settings(max_examples=50, deadline=None)
@given(st.floats(40.0, 160.0), st.floats(5 * 200 / 1024, 15.0))
def test_discretized_gaussian_entropy_matches_analytic(mean, sd):
    # +-4 sd inside the grid and sd >= 5 bin widths
    if mean - 4 * sd < 0 or mean + 4 * sd > 200:
        return
    assert abs(differential_entropy(gaussian(mean, sd)) - analytic_entropy_bits(sd)) < 0.02


likelihood_params = st.tuples(st.floats(20.0, 180.0), st.floats(3.0, 40.0))


@settings(max_examples=50, deadline=None)
@given(likelihood_params, likelihood_params)
def test_likelihood_order_independent(a, b):
    prior = discretize(GaussianMixture([60.0, 140.0], [25.0, 20.0], [0.4, 0.6]), FINE)
    la = gaussian_likelihood(FINE, *a)
    lb = gaussian_likelihood(FINE, *b)
    ab = multiply_likelihood(multiply_likelihood(prior, la), lb)
    ba = multiply_likelihood(multiply_likelihood(prior, lb), la)
    assert np.max(np.abs(ab.density - ba.density)) < 1e-9
    assert abs(ab.density.sum() * FINE.bin_width - 1) < 1e-6
