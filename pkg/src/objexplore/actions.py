"""Action repertoire, measurement simulator and outcome-to-likelihood conversion.

The simulator stands in for the robot: categorical actions (vision, sound)
draw a label from the confusion-matrix row of the true label, squeezing
draws a Young's modulus reading that saturates above the gripper threshold,
and weighing draws a mass reading.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .beliefs import gaussian_likelihood
from .network import (
    NetworkState,
    apply_categorical_measurement,
    apply_continuous_measurement,
)
from .reference import (
    CATEGORY,
    CANONICAL_UNIT,
    DENSITY,
    VOLUME,
    ActionSpec,
    GroundTruthObject,
    ReferenceTables,
    load_action_specs,
)

ACTION_ORDER = ("cat-vision", "mat-vision", "mat-sound", "weighing", "squeezing")


class MeasurementError(ValueError):
    pass


@dataclass(frozen=True)
class MeasurementOutcome:
    """Raw result of one action.

    Exactly one of ``label`` / ``value`` is set. A censored squeeze reports
    the threshold as its value: the reading only says "at least this stiff".
    """

    action: str
    kind: str
    label: Optional[str] = None
    value: Optional[float] = None
    units: Optional[str] = None
    censored: bool = False

    def __post_init__(self):
        if (self.label is None) == (self.value is None):
            raise ValueError("exactly one of label/value must be set")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "MeasurementOutcome":
        return cls(**d)


@dataclass(frozen=True)
class MeasurementUpdate:
    """What an outcome does to the network: a categorical or continuous update."""

    node: str
    measurement: Optional[np.ndarray] = None
    confusion: Optional[np.ndarray] = None
    likelihood: Optional[np.ndarray] = None

    def apply(self, state: NetworkState) -> NetworkState:
        if self.likelihood is not None:
            return apply_continuous_measurement(state, self.node, self.likelihood)
        return apply_categorical_measurement(state, self.node, self.measurement, self.confusion)


def default_action_set(tables: Optional[ReferenceTables] = None) -> list:
    """The five-action repertoire shipped with the package, in canonical order."""
    return load_action_specs(None, tables)


def _true_label(action: ActionSpec, truth: GroundTruthObject) -> str:
    return truth.true_category if action.target_node == CATEGORY else truth.true_material


def simulate_measurement(
    action: ActionSpec,
    truth: GroundTruthObject,
    rng: np.random.Generator,
    tables: Optional[ReferenceTables] = None,
) -> MeasurementOutcome:
    if action.is_categorical:
        if tables is None:
            raise ValueError("categorical simulation needs the reference tables")
        labels = tables.labels(action.target_node)
        row = action.confusion[labels.index(_true_label(action, truth))]
        j = int(rng.choice(len(labels), p=row))
        return MeasurementOutcome(action.name, "categorical", label=labels[j])
    quantity = action.observable
    sd = action.observable_sigma if action.observable_sigma else action.sigma
    value = max(float(rng.normal(truth.value(quantity), sd)), 0.0)
    if action.censor_threshold is not None and value > action.censor_threshold:
        return MeasurementOutcome(
            action.name,
            "continuous",
            value=float(action.censor_threshold),
            units=CANONICAL_UNIT[quantity],
            censored=True,
        )
    return MeasurementOutcome(action.name, "continuous", value=value, units=CANONICAL_UNIT[quantity])


def censored_likelihood(grid, threshold: float) -> np.ndarray:
    """Flat above the threshold, zero at or below it."""
    lik = (grid.centers > threshold).astype(float)
    if not lik.any():
        lik[-1] = 1.0
    return lik


def outcome_to_update(
    outcome: MeasurementOutcome, state: NetworkState, action: ActionSpec
) -> MeasurementUpdate:
    if outcome.action != action.name:
        raise ValueError(f"outcome of {outcome.action} given with action {action.name}")
    node = action.target_node
    if action.is_categorical:
        labels = state.model.labels(node)
        if outcome.label not in labels:
            raise MeasurementError(f"{outcome.label!r} is not a {node} label")
        onehot = np.zeros(len(labels))
        onehot[labels.index(outcome.label)] = 1.0
        return MeasurementUpdate(node, measurement=onehot, confusion=action.confusion)

    grid = state.model.grids[node]
    if outcome.censored:
        return MeasurementUpdate(node, likelihood=censored_likelihood(grid, action.censor_threshold))
    if action.observable == "mass":
        if node != DENSITY:
            raise MeasurementError("mass readings can only update the Density node")
        volume = state.beliefs[VOLUME].mean()
        if not volume > 0:
            raise MeasurementError("volume belief mean must be > 0 to convert mass to density")
        center = outcome.value / volume * 1000.0  # g / cm^3 -> kg/m^3
    else:
        center = outcome.value
    return MeasurementUpdate(node, likelihood=gaussian_likelihood(grid, center, action.sigma))


def apply_outcome(state: NetworkState, outcome: MeasurementOutcome, action: ActionSpec) -> NetworkState:
    return outcome_to_update(outcome, state, action).apply(state)
