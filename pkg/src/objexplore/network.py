"""Five-node Bayesian network over object properties.

Category and Material are PMFs; Elasticity, Density and Volume are gridded
PDFs whose prior is a Gaussian mixture over the labels of their parent
(Volume over categories, Density and Elasticity over materials). A continuous
node's belief is always

    normalize(prior_mixture(weights) * likelihood_product)

so re-weighting the mixture after a parent update and re-applying stored
measurement likelihoods commute.

Messages travel once over the tree (breadth first from the updated node).
A continuous source is first reduced to mixture weights by EM against its
fixed reference components; the vector is then mapped through the edge's
translation matrix and multiplied into a categorical target, or used as the
new mixture weights of a continuous target.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .beliefs import (
    CategoricalBelief,
    ContinuousBelief,
    Grid,
    component_log_densities,
    density_from_log,
    differential_entropy,
    discrete_entropy,
    log_mixture_on_grid,
    multiply_likelihood,
    uniform_categorical,
)
from .reference import (
    CATEGORICAL_NODES,
    CATEGORY,
    COMPONENT_LABELS,
    CONTINUOUS_NODES,
    DENSITY,
    ELASTICITY,
    MATERIAL,
    NODES,
    TREE_EDGES,
    VOLUME,
    EdgeTranslation,
    ReferenceTables,
)

DEFAULT_GRIDS = {
    ELASTICITY: Grid(0.0, 200.0, 1024),  # kPa
    DENSITY: Grid(0.0, 10000.0, 2048),  # kg/m^3
    VOLUME: Grid(0.0, 400.0, 1024),  # cm^3
}

EM_TOL = 1e-8
EM_MAX_ITER = 500


class MixedEntropyError(ValueError):
    pass


def neighbors(node: str) -> list:
    out = []
    for a, b in TREE_EDGES:
        if a == node:
            out.append(b)
        elif b == node:
            out.append(a)
    return out


@dataclass(frozen=True)
class NodeComponents:
    """Reference components of a continuous node, pre-discretized on its grid."""

    labels: tuple
    means: np.ndarray
    sds: np.ndarray
    grid: Grid
    log_phi: np.ndarray
    on_grid: np.ndarray

    @classmethod
    def build(cls, labels, table, grid: Grid) -> "NodeComponents":
        table = np.asarray(table, dtype=float)
        log_phi, on_grid = component_log_densities(table[:, 0], table[:, 1], grid)
        for a in (log_phi, on_grid):
            a.setflags(write=False)
        return cls(tuple(labels), table[:, 0], table[:, 1], grid, log_phi, on_grid)

    def as_mapping(self) -> dict:
        return {lab: (float(m), float(s)) for lab, m, s in zip(self.labels, self.means, self.sds)}


@dataclass(frozen=True)
class NetworkModel:
    """Static part of the network: labels, grids, components and edge matrices."""

    tables: ReferenceTables
    grids: Mapping[str, Grid]
    components: Mapping[str, NodeComponents]
    translations: Mapping[tuple, np.ndarray]

    def labels(self, node: str) -> tuple:
        return self.tables.labels(node)


@dataclass(frozen=True)
class Message:
    origin: str
    target: str
    vector: np.ndarray


@dataclass(frozen=True)
class NetworkState:
    """Beliefs of all five nodes plus the mixture weights of the continuous ones."""

    model: NetworkModel
    beliefs: Mapping[str, object]
    weights: Mapping[str, np.ndarray] = field(default_factory=dict)

    @property
    def category(self) -> CategoricalBelief:
        return self.beliefs[CATEGORY]

    @property
    def material(self) -> CategoricalBelief:
        return self.beliefs[MATERIAL]

    @property
    def elasticity(self) -> ContinuousBelief:
        return self.beliefs[ELASTICITY]

    @property
    def density(self) -> ContinuousBelief:
        return self.beliefs[DENSITY]

    @property
    def volume(self) -> ContinuousBelief:
        return self.beliefs[VOLUME]

    @property
    def edges(self) -> tuple:
        return TREE_EDGES

    def __getitem__(self, node: str):
        return self.beliefs[node]

    def with_belief(self, node: str, belief, weights=None) -> "NetworkState":
        beliefs = dict(self.beliefs)
        beliefs[node] = belief
        new_weights = dict(self.weights)
        if weights is not None:
            new_weights[node] = weights
        return NetworkState(self.model, beliefs, new_weights)


def build_model(
    tables: ReferenceTables, edges, grids: Optional[Mapping[str, Grid]] = None
) -> NetworkModel:
    grids = dict(DEFAULT_GRIDS if grids is None else grids)
    missing = [n for n in CONTINUOUS_NODES if n not in grids]
    if missing:
        raise ValueError(f"no grid for {', '.join(missing)}")
    components = {
        node: NodeComponents.build(tables.labels(node), tables.components(node), grids[node])
        for node in CONTINUOUS_NODES
    }
    translations = {}
    for e in edges:
        if isinstance(e, EdgeTranslation):
            translations[(e.source, e.target)] = np.asarray(e.matrix, dtype=float)
    for a, b in TREE_EDGES:
        for key in ((a, b), (b, a)):
            if key not in translations:
                raise ValueError(f"missing translation {key[0]}->{key[1]}")
    return NetworkModel(tables, grids, components, translations)


def _reweighted(comp: NodeComponents, weights, likelihood_product) -> ContinuousBelief:
    log_mix = log_mixture_on_grid(comp.log_phi, comp.on_grid, weights)
    with np.errstate(divide="ignore"):
        log_post = log_mix + np.log(likelihood_product)
    return ContinuousBelief(comp.grid, density_from_log(log_post, comp.grid), likelihood_product)


def init_network(
    tables: ReferenceTables, edges, grids: Optional[Mapping[str, Grid]] = None
) -> NetworkState:
    """Uniform Category/Material PMFs and the mixtures they induce on the continuous nodes."""
    model = edges if isinstance(edges, NetworkModel) else build_model(tables, edges, grids)
    beliefs = {
        CATEGORY: uniform_categorical(tables.category_labels),
        MATERIAL: uniform_categorical(tables.material_labels),
    }
    weights = {}
    for node in CONTINUOUS_NODES:
        parent = COMPONENT_LABELS[node]
        w = beliefs[parent].probs @ model.translations[(parent, node)]
        w = w / w.sum()
        comp = model.components[node]
        weights[node] = w
        beliefs[node] = _reweighted(comp, w, np.ones(comp.grid.bins))
    return NetworkState(model, beliefs, weights)


# ---------------------------------------------------------------------------
# EM for mixture weights
# ---------------------------------------------------------------------------


def _em_weights(masses, log_phi, on_grid, tol=EM_TOL, max_iter=EM_MAX_ITER) -> np.ndarray:
    """Mixture weights maximizing the bin-mass-weighted likelihood of the bin centers."""
    n = log_phi.shape[1]
    idx = np.flatnonzero(on_grid)
    if idx.size == 0:
        raise ValueError("no mixture component has support on the grid")
    weights = np.zeros(n)
    if idx.size == 1:
        weights[idx[0]] = 1.0
        return weights
    keep = masses > 0
    q = masses[keep] / masses[keep].sum()
    logs = log_phi[np.ix_(keep, idx)]
    # Per-bin rescaling cancels in the responsibilities and keeps far tails finite.
    phi = np.exp(logs - logs.max(axis=1, keepdims=True))
    w = np.full(idx.size, 1.0 / idx.size)
    for _ in range(max_iter):
        mix = np.maximum(phi @ w, 1e-300)
        w_new = w * (phi.T @ (q / mix))
        w_new /= w_new.sum()
        done = np.max(np.abs(w_new - w)) < tol
        w = w_new
        if done:
            break
    weights[idx] = w
    return weights


def estimate_mixture_weights(pdf: ContinuousBelief, components) -> np.ndarray:
    """EM estimate of the weights of fixed reference components for a gridded belief.

    The belief is treated as weighted samples at the bin centers (weight = bin
    probability mass). ``components`` is either a label -> (mean, sd) mapping
    or an (n, 2) array of (mean, sd) rows.
    """
    if isinstance(components, NodeComponents):
        comp = components
    else:
        if isinstance(components, Mapping):
            table = np.array(list(components.values()), dtype=float)
            labels = tuple(components)
        else:
            table = np.atleast_2d(np.asarray(components, dtype=float))
            labels = tuple(str(i) for i in range(len(table)))
        if table.size == 0:
            raise ValueError("need at least one component")
        comp = NodeComponents.build(labels, table, pdf.grid)
    if comp.grid != pdf.grid:
        raise ValueError("components were discretized on a different grid")
    return _em_weights(pdf.masses, comp.log_phi, comp.on_grid)


# ---------------------------------------------------------------------------
# Message passing and measurement updates
# ---------------------------------------------------------------------------


def node_vector(state: NetworkState, node: str) -> np.ndarray:
    """Label-space vector a node sends: its PMF, or EM weights for a continuous node."""
    belief = state.beliefs[node]
    if node in CATEGORICAL_NODES:
        return belief.probs
    return _em_weights(belief.masses, state.model.components[node].log_phi,
                       state.model.components[node].on_grid)


def _receive(state: NetworkState, node: str, message: np.ndarray) -> NetworkState:
    if node in CATEGORICAL_NODES:
        prior = state.beliefs[node]
        post = CategoricalBelief.from_unnormalized(prior.labels, prior.probs * message)
        return state.with_belief(node, post)
    comp = state.model.components[node]
    belief = _reweighted(comp, message, state.beliefs[node].likelihood_product)
    return state.with_belief(node, belief, weights=message)


def propagate_messages(
    state: NetworkState,
    origin: str,
    *,
    origin_vector=None,
    return_messages: bool = False,
):
    """Single breadth-first pass of messages from ``origin`` over the tree.

    ``origin_vector`` overrides what the origin sends (used when emulating an
    expected measurement). Every other node is updated exactly once.
    """
    if origin not in NODES:
        raise KeyError(origin)
    model = state.model
    vectors = {
        origin: np.asarray(origin_vector, dtype=float)
        if origin_vector is not None
        else node_vector(state, origin)
    }
    messages = []
    visited = {origin}
    queue = deque([origin])
    while queue:
        src = queue.popleft()
        for dst in neighbors(src):
            if dst in visited:
                continue
            visited.add(dst)
            if src not in vectors:
                vectors[src] = node_vector(state, src)
            msg = vectors[src] @ model.translations[(src, dst)]
            msg = msg / msg.sum()
            messages.append(Message(src, dst, msg))
            state = _receive(state, dst, msg)
            # Categorical targets forward their updated PMF; continuous nodes are leaves.
            if dst in CATEGORICAL_NODES:
                vectors[dst] = state.beliefs[dst].probs
            queue.append(dst)
    if return_messages:
        return state, messages
    return state


def categorical_likelihood(confusion, measurement) -> np.ndarray:
    """Likelihood over true labels of a (possibly soft) measured-label vector.

    ``confusion`` rows are true labels and columns measured labels.
    """
    conf = np.asarray(confusion, dtype=float)
    m = measurement.probs if isinstance(measurement, CategoricalBelief) else np.asarray(
        measurement, dtype=float
    )
    if conf.shape[1] != m.size:
        raise ValueError("measurement does not match the confusion matrix")
    return conf @ m


def apply_categorical_measurement(
    state: NetworkState, node: str, measurement, confusion
) -> NetworkState:
    if node not in CATEGORICAL_NODES:
        raise ValueError(f"{node} is not a categorical node")
    prior = state.beliefs[node]
    conf = np.asarray(confusion, dtype=float)
    if conf.shape != (len(prior.labels), len(prior.labels)):
        raise ValueError(f"confusion matrix does not match node {node}")
    lik = categorical_likelihood(conf, measurement)
    post = CategoricalBelief.from_unnormalized(prior.labels, prior.probs * lik)
    return propagate_messages(state.with_belief(node, post), node)


def apply_continuous_measurement(state: NetworkState, node: str, likelihood) -> NetworkState:
    if node not in CONTINUOUS_NODES:
        raise ValueError(f"{node} is not a continuous node")
    post = multiply_likelihood(state.beliefs[node], likelihood)
    return propagate_messages(state.with_belief(node, post), node)


# ---------------------------------------------------------------------------
# Entropy and summaries
# ---------------------------------------------------------------------------


def check_target_set(target_set) -> tuple:
    nodes = tuple(target_set)
    if not nodes:
        raise ValueError("target set is empty")
    unknown = [n for n in nodes if n not in NODES]
    if unknown:
        raise KeyError(f"unknown node(s): {', '.join(unknown)}")
    kinds = {n in CATEGORICAL_NODES for n in nodes}
    if len(kinds) > 1:
        raise MixedEntropyError("mixed-unit entropy not supported")
    return nodes


def node_entropy(state: NetworkState, node: str) -> float:
    belief = state.beliefs[node]
    if node in CATEGORICAL_NODES:
        return discrete_entropy(belief)
    return differential_entropy(belief)


def node_entropies(state: NetworkState) -> dict:
    return {n: node_entropy(state, n) for n in NODES}


def network_entropy(state: NetworkState, target_set) -> float:
    """Summed entropy (bits) of a same-kind set of nodes."""
    return float(sum(node_entropy(state, n) for n in check_target_set(target_set)))


def summarize(state: NetworkState, top=3) -> dict:
    """JSON-ready snapshot: PMFs for categorical nodes, moments for continuous ones."""
    out = {}
    for node in CATEGORICAL_NODES:
        b = state.beliefs[node]
        out[node] = {
            "probs": {lab: float(p) for lab, p in zip(b.labels, b.probs)},
            "entropy_bits": discrete_entropy(b),
            "top": [[lab, p] for lab, p in b.top(top)],
        }
    for node in CONTINUOUS_NODES:
        b = state.beliefs[node]
        labels = state.model.components[node].labels
        w = node_vector(state, node)
        order = np.argsort(-w, kind="stable")[:top]
        out[node] = {
            "mean": b.mean(),
            "sd": b.sd(),
            "entropy_bits": differential_entropy(b),
            "top": [[labels[i], float(w[i])] for i in order],
        }
    return out
