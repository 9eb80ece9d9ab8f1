"""Categorical (PMF) and gridded continuous (PDF) beliefs.

Beliefs are immutable values; every operation returns a new object. Entropies
are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

PMF_TOL = 1e-9
PDF_TOL = 1e-6
DENSITY_FLOOR = 1e-300
MIN_BINS = 64
# Components with less probability than this inside the grid are treated as absent.
MIN_GRID_MASS = 1e-12


class IncompatibleMeasurement(ValueError):
    """The posterior has no mass anywhere (prior and likelihood do not overlap)."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CategoricalBelief:
    labels: tuple
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        p = _frozen(self.probs)
        if p.ndim != 1 or p.size != len(self.labels):
            raise ValueError("probs must be a vector with one entry per label")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > PMF_TOL:
            raise ValueError(f"probabilities sum to {p.sum():.12g}, expected 1")
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_unnormalized(cls, labels, weights) -> "CategoricalBelief":
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        if not total > 0 or not np.isfinite(total):
            raise IncompatibleMeasurement("measurement incompatible with belief")
        return cls(labels, w / total)

    def prob(self, label: str) -> float:
        return float(self.probs[self.labels.index(label)])

    def top(self, n=3) -> list:
        """The ``n`` most probable (label, prob) pairs; ties keep label order."""
        order = np.argsort(-self.probs, kind="stable")[:n]
        return [(self.labels[i], float(self.probs[i])) for i in order]


@dataclass(frozen=True)
class Grid:
    """Uniform binning of ``[lower, upper]`` into ``bins`` equal bins."""

    lower: float
    upper: float
    bins: int

    def __post_init__(self):
        if not (self.upper > self.lower >= 0):
            raise ValueError("grid needs upper > lower >= 0")
        if self.bins < MIN_BINS:
            raise ValueError(f"grid needs at least {MIN_BINS} bins")

    @property
    def bin_width(self) -> float:
        return (self.upper - self.lower) / self.bins

    @property
    def centers(self) -> np.ndarray:
        return self.lower + (np.arange(self.bins) + 0.5) * self.bin_width


@dataclass(frozen=True)
class ContinuousBelief:
    """Density values at bin centers plus the accumulated measurement likelihood.

    ``likelihood_product`` is kept up to a positive scale factor (rescaled to a
    maximum of 1) since only its shape matters.
    """

    grid: Grid
    density: np.ndarray
    likelihood_product: np.ndarray = None

    def __post_init__(self):
        d = _frozen(self.density)
        if d.shape != (self.grid.bins,):
            raise ValueError("density must have one value per bin")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError("density must be finite and non-negative")
        mass = d.sum() * self.grid.bin_width
        if abs(mass - 1.0) > PDF_TOL:
            raise ValueError(f"density integrates to {mass:.9g}, expected 1")
        object.__setattr__(self, "density", d)
        lp = self.likelihood_product
        lp = np.ones(self.grid.bins) if lp is None else lp
        lp = _frozen(lp)
        if lp.shape != d.shape:
            raise ValueError("likelihood_product must match the grid")
        object.__setattr__(self, "likelihood_product", lp)

    @property
    def masses(self) -> np.ndarray:
        """Probability mass per bin."""
        return self.density * self.grid.bin_width

    def mean(self) -> float:
        return float(np.dot(self.masses, self.grid.centers))

    def sd(self) -> float:
        x = self.grid.centers
        m = self.mean()
        return float(np.sqrt(max(np.dot(self.masses, (x - m) ** 2), 0.0)))

    def mode(self) -> float:
        return float(self.grid.centers[int(np.argmax(self.density))])

    def mass_below(self, value: float) -> float:
        return float(self.masses[self.grid.centers < value].sum())


@dataclass(frozen=True)
class GaussianMixture:
    component_means: np.ndarray
    component_sds: np.ndarray
    weights: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        mu, sd, w = (_frozen(v) for v in (self.component_means, self.component_sds, self.weights))
        if not (mu.shape == sd.shape == w.shape) or mu.ndim != 1:
            raise ValueError("means, sds and weights must be vectors of equal length")
        if np.any(sd <= 0):
            raise ValueError("component sds must be > 0")
        if np.any(w < 0) or abs(w.sum() - 1.0) > PMF_TOL:
            raise ValueError("weights must be non-negative and sum to 1")
        if self.labels and len(self.labels) != mu.size:
            raise ValueError("one label per component")
        object.__setattr__(self, "component_means", mu)
        object.__setattr__(self, "component_sds", sd)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "labels", tuple(self.labels))


def uniform_categorical(labels: Sequence[str]) -> CategoricalBelief:
    labels = tuple(labels)
    if not labels:
        raise ValueError("need at least one label")
    return CategoricalBelief(labels, np.full(len(labels), 1.0 / len(labels)))


def mixture_from_pmf(
    pmf: CategoricalBelief, components: Mapping[str, tuple]
) -> GaussianMixture:
    """Weight per-label reference Gaussians by the PMF.

    ``components`` maps each label to its (mean, sd), e.g. a row of the
    reference density table.
    """
    if tuple(components) != pmf.labels:
        raise ValueError(
            f"component labels {tuple(components)} do not match PMF labels {pmf.labels}"
        )
    params = np.array([components[lab] for lab in pmf.labels], dtype=float)
    return GaussianMixture(params[:, 0], params[:, 1], pmf.probs, labels=pmf.labels)


def component_log_densities(means, sds, grid: Grid):
    """Log densities of each component on the grid, each truncated to the grid.

    Returns ``(log_phi, on_grid)``: ``log_phi`` has shape (bins, n_components)
    and every column integrates to 1 over the grid; ``on_grid`` flags
    components that put at least ``MIN_GRID_MASS`` inside ``[lower, upper]``.
    """
    means = np.asarray(means, dtype=float)
    sds = np.asarray(sds, dtype=float)
    x = grid.centers[:, None]
    log_pdf = norm.logpdf(x, loc=means[None, :], scale=sds[None, :])
    log_norm = logsumexp(log_pdf, axis=0) + np.log(grid.bin_width)
    log_phi = log_pdf - log_norm[None, :]
    grid_mass = norm.cdf(grid.upper, means, sds) - norm.cdf(grid.lower, means, sds)
    return log_phi, grid_mass >= MIN_GRID_MASS


def density_from_log(log_values, grid: Grid) -> np.ndarray:
    """Exponentiate unnormalized log densities into a normalized, clamped density."""
    log_values = np.asarray(log_values, dtype=float)
    top = np.max(log_values)
    if not np.isfinite(top):
        raise IncompatibleMeasurement("measurement incompatible with belief")
    d = np.exp(log_values - top)
    d /= d.sum() * grid.bin_width
    d[d < DENSITY_FLOOR] = 0.0
    return d / (d.sum() * grid.bin_width)


def log_mixture_on_grid(log_phi, on_grid, weights) -> np.ndarray:
    """Log density of a mixture of pre-discretized components."""
    w = np.where(on_grid, np.asarray(weights, dtype=float), 0.0)
    if not w.sum() > 0:
        raise ValueError("grid does not cover mixture")
    with np.errstate(divide="ignore"):
        log_w = np.log(w / w.sum())
    return logsumexp(log_phi + log_w[None, :], axis=1)


def discretize(gmm: GaussianMixture, grid: Grid) -> ContinuousBelief:
    """Evaluate a mixture at bin centers, truncated to the grid and renormalized.

    Each component is truncated and renormalized on its own, so the mixture
    weights keep their meaning when a component straddles the grid edge.
    """
    log_phi, on_grid = component_log_densities(gmm.component_means, gmm.component_sds, grid)
    log_mix = log_mixture_on_grid(log_phi, on_grid, gmm.weights)
    return ContinuousBelief(grid, density_from_log(log_mix, grid))


def _as_probs(pmf) -> np.ndarray:
    return pmf.probs if isinstance(pmf, CategoricalBelief) else np.asarray(pmf, dtype=float)


def discrete_entropy(pmf) -> float:
    """Shannon entropy in bits of a PMF (``CategoricalBelief`` or probability vector)."""
    p = _as_probs(pmf)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def differential_entropy(pdf: ContinuousBelief) -> float:
    """Grid approximation ``-sum h p log2 p`` of the differential entropy in bits."""
    d = pdf.density[pdf.density > 0]
    return float(-pdf.grid.bin_width * np.sum(d * np.log2(d)))


def multiply_likelihood(pdf: ContinuousBelief, likelihood) -> ContinuousBelief:
    """Bayesian product of a belief with a likelihood on the same grid."""
    lik = np.asarray(likelihood, dtype=float)
    if lik.shape != pdf.density.shape:
        raise ValueError("likelihood must be given on the belief's grid")
    if np.any(lik < 0) or not np.all(np.isfinite(lik)):
        raise ValueError("likelihood must be finite and non-negative")
    with np.errstate(divide="ignore"):
        log_post = np.log(pdf.density) + np.log(lik)
    density = density_from_log(log_post, pdf.grid)
    acc = pdf.likelihood_product * lik
    top = acc.max()
    if top > 0:
        acc = acc / top
    return ContinuousBelief(pdf.grid, density, acc)


def gaussian_likelihood(grid: Grid, mean: float, sd: float) -> np.ndarray:
    """Gaussian likelihood on the grid, scaled so its maximum is 1.

    The scaling is done in log space, so a measurement far off the grid still
    yields a usable (edge-peaked) likelihood rather than underflowing to zero.
    """
    z = -0.5 * ((grid.centers - mean) / sd) ** 2
    return np.exp(z - z.max())
