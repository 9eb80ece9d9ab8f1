import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from objexplore.beliefs import ContinuousBelief, GaussianMixture, Grid, differential_entropy, discretize
from objexplore.infogain import (
    emulate_continuous_posterior,
    expected_categorical_entropy,
    expected_information_gain,
    experimental_information_gain,
    sample_entropy_vector,
)
from objexplore.network import apply_categorical_measurement, network_entropy
from objexplore.reference import (
    CATEGORY,
    DENSITY,
    ELASTICITY,
    MATERIAL,
    VOLUME,
    ActionSpec,
    build_default_confusion,
)

GRID = Grid(0.0, 200.0, 1024)


def gaussian(mean, sd, grid=GRID):
    return discretize(GaussianMixture([mean], [sd], [1.0]), grid)


# --- convolution -------------------------------------------------------------


def test_sigma_zero_is_identity():
    pdf = gaussian(100.0, 10.0)
    assert np.array_equal(emulate_continuous_posterior(pdf, 0.0).density, pdf.density)


def test_convolution_gaussian_closure():
    out = emulate_continuous_posterior(gaussian(100.0, 10.0), 10.0)
    assert abs(out.mean() - 100.0) <= GRID.bin_width
    assert out.sd() ** 2 == pytest.approx(200.0, rel=0.02)
    assert out.density.sum() * GRID.bin_width == pytest.approx(1.0, abs=1e-6)
    assert differential_entropy(out) == pytest.approx(5.8706, abs=0.02)


def test_convolution_matches_direct_sum():
    # O(n^2) oracle away from the edges: integral of pdf(y) N(x - y; 0, s) dy
    pdf = gaussian(100.0, 8.0)
    s = 6.0
    x = GRID.centers
    kernel = np.exp(-0.5 * ((x[:, None] - x[None, :]) / s) ** 2)
    kernel[np.abs(x[:, None] - x[None, :]) > 5 * s + 1e-9] = 0.0
    kernel /= kernel.sum(axis=1, keepdims=True)
    ref = kernel @ pdf.density
    out = emulate_continuous_posterior(pdf, s)
    inner = slice(200, 824)
    assert np.allclose(out.density[inner], ref[inner], rtol=1e-3, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(0.0, 1.0), min_size=GRID.bins // 64, max_size=GRID.bins // 64).filter(
        lambda v: sum(v) > 1e-3
    ),
    st.floats(0.05, 60.0),
)
def test_convolution_never_decreases_entropy(blocks, sigma):
    density = np.repeat(np.array(blocks), 64)
    density = density / (density.sum() * GRID.bin_width)
    pdf = ContinuousBelief(GRID, density)
    out = emulate_continuous_posterior(pdf, sigma)
    assert abs(out.density.sum() * GRID.bin_width - 1) < 1e-6
    assert differential_entropy(out) >= differential_entropy(pdf) - 1e-6


def test_convolution_rejects_negative_sigma():
    with pytest.raises(ValueError):
        emulate_continuous_posterior(gaussian(100.0, 10.0), -1.0)


# --- categorical machinery ---------------------------------------------------


def row_entropy_oracle(row):
    return -sum(p * math.log2(p) for p in row if p > 0)


def test_sample_entropy_vector_examples():
    assert np.array_equal(sample_entropy_vector(np.eye(3)), np.zeros(3))
    assert np.allclose(sample_entropy_vector(np.full((4, 4), 0.25)), 2.0)
    conf = build_default_confusion(0.6345, 10)
    row = [0.6345] + [(1 - 0.6345) / 9] * 9
    assert np.allclose(sample_entropy_vector(conf), row_entropy_oracle(row), atol=1e-12)
    assert sample_entropy_vector(conf)[0] == pytest.approx(2.106, abs=1e-3)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=10, max_size=10).filter(lambda v: sum(v) > 1e-3))
def test_identity_confusion_gives_zero(raw):
    p = np.array(raw) / sum(raw)
    assert expected_categorical_entropy(p, np.eye(10)) == 0.0


def test_uniform_confusion_gives_log_k():
    p = np.random.default_rng(1).dirichlet(np.ones(10))
    assert expected_categorical_entropy(p, np.full((10, 10), 0.1)) == pytest.approx(math.log2(10), abs=1e-12)


def test_uniform_prior_cat_vision():
    conf = build_default_confusion(0.6345, 10)
    assert expected_categorical_entropy(np.full(10, 0.1), conf) == pytest.approx(2.106, abs=1e-3)


def test_expected_categorical_entropy_monte_carlo():
    rng = np.random.default_rng(7)
    conf = rng.dirichlet(np.ones(8) * 0.7, size=8)
    prior = rng.dirichlet(np.ones(8))
    # sample a true label from the prior, then the measured label from its row,
    # and score the measured label's row entropy
    truth = rng.choice(8, size=100_000, p=prior)
    cum = conf.cumsum(axis=1)
    measured = (rng.random(100_000)[:, None] > cum[truth]).sum(axis=1)
    mc = np.mean([row_entropy_oracle(conf[m]) for m in measured])
    assert abs(expected_categorical_entropy(prior, conf) - mc) < 0.05


# --- expected IG on the network ---------------------------------------------


def identity_action(name, node, k):
    return ActionSpec(name, node, "categorical", confusion=np.eye(k))


def test_identity_action_gains_full_entropy(fresh):
    ev = expected_information_gain(fresh, identity_action("perfect", CATEGORY, 10), [CATEGORY])
    assert ev.expected_ig == pytest.approx(3.3219, abs=1e-4)
    assert ev.per_node_expected_entropy[CATEGORY] == 0.0


def test_uniform_confusion_gains_nothing(fresh):
    act = ActionSpec("blind", CATEGORY, "categorical", confusion=np.full((10, 10), 0.1))
    assert expected_information_gain(fresh, act, [CATEGORY]).expected_ig == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("name", ["squeezing", "weighing"])
def test_continuous_own_node_gain_is_not_positive(fresh, actions, name):
    act = actions[name]
    assert expected_information_gain(fresh, act, [act.target_node]).expected_ig <= 1e-9


def test_own_node_gain_not_positive_after_update(fresh, actions, tables):
    m = np.zeros(8)
    m[tables.material_labels.index("wood")] = 1.0
    state = apply_categorical_measurement(fresh, MATERIAL, m, actions["mat-vision"].confusion)
    for name in ("squeezing", "weighing"):
        act = actions[name]
        assert expected_information_gain(state, act, [act.target_node]).expected_ig <= 1e-9


def test_expected_ig_deterministic(fresh, data):
    for act in data.actions:
        a = expected_information_gain(fresh, act, [CATEGORY])
        b = expected_information_gain(fresh, act, [CATEGORY])
        assert a.expected_ig == b.expected_ig
        assert a.per_node_expected_entropy == b.per_node_expected_entropy


def test_fresh_network_ranking(fresh, data):
    gains = {a.name: expected_information_gain(fresh, a, [CATEGORY]).expected_ig for a in data.actions}
    assert max(gains, key=gains.get) == "cat-vision"
    assert gains["cat-vision"] == pytest.approx(math.log2(10) - 2.106, abs=2e-3)


def test_continuous_targets_accepted(fresh, actions):
    ev = expected_information_gain(fresh, actions["mat-vision"], [ELASTICITY, DENSITY, VOLUME])
    assert math.isfinite(ev.expected_ig)


def test_bin_doubling_converges():
    for lo, hi, mean, sd in [(0, 200, 100, 10), (0, 10000, 2600, 200), (0, 400, 85, 20)]:
        a = differential_entropy(gaussian(mean, sd, Grid(lo, hi, 1024)))
        b = differential_entropy(gaussian(mean, sd, Grid(lo, hi, 2048)))
        assert abs(a - b) < 0.01


# --- experimental IG ---------------------------------------------------------


def test_experimental_ig_examples(fresh, tables):
    assert experimental_information_gain(fresh, fresh, [CATEGORY]) == 0.0
    onehot = np.zeros(10)
    onehot[0] = 1.0
    sure = apply_categorical_measurement(fresh, CATEGORY, onehot, np.eye(10))
    assert experimental_information_gain(fresh, sure, [CATEGORY]) == pytest.approx(3.3219, abs=1e-4)
    half = np.zeros(10)
    half[:2] = 0.5
    halved = apply_categorical_measurement(fresh, CATEGORY, half, np.eye(10))
    assert experimental_information_gain(fresh, halved, [CATEGORY]) == pytest.approx(2.3219, abs=1e-4)
    # can be negative
    assert experimental_information_gain(sure, fresh, [CATEGORY]) < 0
    assert network_entropy(halved, [CATEGORY]) == pytest.approx(1.0)
