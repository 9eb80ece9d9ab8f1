"""Expected and experimental information gain.

Expected IG of an action compares the current entropy of a target node set
with the entropy after an *emulated* measurement:

* continuous action: the target node's PDF convolved with N(0, sigma^2);
* categorical action: the expected measurement ``pmf @ C`` is sent as the
  node's message, and the node itself is scored with the confusion-weighted
  sample entropy (sum_i (pmf @ C)_i * H(C[i, :])).

The emulated node's message is propagated through a copy of the network, so
an action can gain information about nodes it does not measure directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beliefs import (
    CategoricalBelief,
    ContinuousBelief,
    density_from_log,
    differential_entropy,
)
from .network import (
    NetworkState,
    check_target_set,
    network_entropy,
    node_entropies,
    propagate_messages,
)
from .reference import ActionSpec

KERNEL_HALF_WIDTH_SD = 5.0


@dataclass(frozen=True)
class ActionEvaluation:
    action: str
    expected_ig: float
    per_node_expected_entropy: dict

    def to_dict(self) -> dict:
        return {
            "action": self.action,
            "expected_ig": self.expected_ig,
            "per_node_expected_entropy": dict(self.per_node_expected_entropy),
        }


def gaussian_kernel(sigma: float, bin_width: float, max_half_width: int) -> np.ndarray:
    half = int(np.floor(KERNEL_HALF_WIDTH_SD * sigma / bin_width))
    half = min(half, max_half_width)
    if half == 0:
        return np.ones(1)
    x = np.arange(-half, half + 1) * bin_width
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def emulate_continuous_posterior(pdf: ContinuousBelief, sigma_a: float) -> ContinuousBelief:
    """Convolve a gridded belief with a zero-mean Gaussian of SD ``sigma_a``.

    The kernel is truncated at +-5 sigma and the belief is reflected at the
    grid edges before convolving. The resulting operator is symmetric and
    row-stochastic, so mass is conserved and entropy cannot decrease.
    """
    if sigma_a < 0:
        raise ValueError("sigma_a must be >= 0")
    if sigma_a == 0:
        return pdf
    n = pdf.grid.bins
    kernel = gaussian_kernel(sigma_a, pdf.grid.bin_width, n - 1)
    half = kernel.size // 2
    if half == 0:
        return pdf
    padded = np.pad(pdf.density, half, mode="symmetric")
    out = np.convolve(padded, kernel, mode="valid")
    out = np.maximum(out, 0.0)
    with np.errstate(divide="ignore"):
        density = density_from_log(np.log(out), pdf.grid)
    return ContinuousBelief(pdf.grid, density, pdf.likelihood_product)


def sample_entropy_vector(confusion) -> np.ndarray:
    """Entropy in bits of each row of a row-stochastic confusion matrix."""
    c = np.asarray(confusion, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(c > 0, c * np.log2(c), 0.0)
    return -terms.sum(axis=1)


def expected_measurement(pmf, confusion) -> np.ndarray:
    """Distribution of the measured label under the current belief."""
    p = pmf.probs if isinstance(pmf, CategoricalBelief) else np.asarray(pmf, dtype=float)
    c = np.asarray(confusion, dtype=float)
    if c.shape != (p.size, p.size):
        raise ValueError("confusion matrix does not match the PMF")
    return p @ c


def expected_categorical_entropy(pmf, confusion) -> float:
    """Sample entropy vector weighted by the expected measurement, in bits."""
    return float(expected_measurement(pmf, confusion) @ sample_entropy_vector(confusion))


def emulate(state: NetworkState, action: ActionSpec):
    """Emulated network after ``action`` and the expected entropy of its target node."""
    node = action.target_node
    if action.is_categorical:
        prior = state.beliefs[node]
        m = expected_measurement(prior, action.confusion)
        emulated = CategoricalBelief.from_unnormalized(prior.labels, m)
        node_h = expected_categorical_entropy(prior, action.confusion)
        clone = state.with_belief(node, emulated)
        clone = propagate_messages(clone, node, origin_vector=emulated.probs)
    else:
        emulated = emulate_continuous_posterior(state.beliefs[node], action.sigma)
        node_h = differential_entropy(emulated)
        clone = propagate_messages(state.with_belief(node, emulated), node)
    return clone, node_h


def expected_information_gain(
    state: NetworkState, action: ActionSpec, target_set
) -> ActionEvaluation:
    nodes = check_target_set(target_set)
    before = network_entropy(state, nodes)
    clone, node_h = emulate(state, action)
    per_node = node_entropies(clone)
    per_node[action.target_node] = node_h
    after = sum(per_node[n] for n in nodes)
    return ActionEvaluation(action.name, float(before - after), per_node)


def experimental_information_gain(
    before: NetworkState, after: NetworkState, target_set
) -> float:
    return network_entropy(before, target_set) - network_entropy(after, target_set)
