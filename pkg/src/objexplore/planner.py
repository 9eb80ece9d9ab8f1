"""Greedy information-gain action selection (ACTSEL) and the random baseline.

Actions are used without replacement, so an episode has at most as many
steps as there are actions. Measurement noise for action ``i`` in a run with
seed ``s`` comes from its own stream ``default_rng([s, i + 1])`` and the RAND
policy draws from ``default_rng([s, 0])``. Runs with equal seeds therefore
see identical outcomes for the same action regardless of policy or order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .actions import MeasurementOutcome, apply_outcome, simulate_measurement
from .infogain import ActionEvaluation, expected_information_gain
from .network import (
    NetworkState,
    check_target_set,
    network_entropy,
    node_entropies,
    summarize,
)
from .reference import (
    CATEGORY,
    DENSITY,
    ELASTICITY,
    MATERIAL,
    VOLUME,
    ActionSpec,
    GroundTruthObject,
)

ACTSEL = "ACTSEL"
RAND = "RAND"
POLICIES = (ACTSEL, RAND)
TERMINATE = "TERMINATED"

OPTIMIZATION_MODES = {
    "Category": (CATEGORY,),
    "Material": (MATERIAL,),
    "Elasticity": (ELASTICITY,),
    "Density": (DENSITY,),
    "Volume": (VOLUME,),
    "Category+Material": (CATEGORY, MATERIAL),
    "AllContinuous": (ELASTICITY, DENSITY, VOLUME),
}

CE_FLOOR = 1e-12


def cross_entropy(pmf, truth_label: str) -> float:
    """-log2 of the probability given to the true label (floored at 1e-12)."""
    return float(-np.log2(max(pmf.prob(truth_label), CE_FLOOR)))


def target_set(mode: str) -> tuple:
    try:
        return OPTIMIZATION_MODES[mode]
    except KeyError:
        raise ValueError(
            f"unknown optimization mode {mode!r}; choose from {', '.join(OPTIMIZATION_MODES)}"
        ) from None


@dataclass(frozen=True)
class EpisodeConfig:
    optimization_mode: str = "Category"
    policy: str = ACTSEL
    terminate_on_nonpositive_ig: bool = False
    max_steps: int = 5
    seed: int = 0

    def __post_init__(self):
        target_set(self.optimization_mode)
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")


@dataclass
class StepRecord:
    step: int
    available: list
    evaluations: list
    chosen: str
    outcome: Optional[MeasurementOutcome] = None
    experimental_ig: Optional[float] = None
    entropies: dict = field(default_factory=dict)
    cross_entropies: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "available": list(self.available),
            "evaluations": [e.to_dict() for e in self.evaluations],
            "chosen": self.chosen,
            "outcome": self.outcome.to_dict() if self.outcome else None,
            "experimental_ig": self.experimental_ig,
            "entropies": dict(self.entropies),
            "cross_entropies": dict(self.cross_entropies),
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, d) -> "StepRecord":
        return cls(
            step=d["step"],
            available=list(d["available"]),
            evaluations=[
                ActionEvaluation(e["action"], e["expected_ig"], e["per_node_expected_entropy"])
                for e in d["evaluations"]
            ],
            chosen=d["chosen"],
            outcome=MeasurementOutcome.from_dict(d["outcome"]) if d["outcome"] else None,
            experimental_ig=d["experimental_ig"],
            entropies=d["entropies"],
            cross_entropies=d["cross_entropies"],
            summary=d.get("summary", {}),
        )


@dataclass
class EpisodeTrace:
    """Everything that happened in one episode.

    ``initial_entropies``/``initial_cross_entropies`` describe the network
    before the first action; step ``k`` holds the values after its action.
    A final step with ``chosen == TERMINATED`` records the evaluations that
    led to stopping.
    """

    object: str
    mode: str
    policy: str
    seed: int
    run_index: int = 0
    initial_entropies: dict = field(default_factory=dict)
    initial_cross_entropies: dict = field(default_factory=dict)
    steps: list = field(default_factory=list)
    states: list = field(default_factory=list, repr=False, compare=False)

    @property
    def executed(self) -> list:
        return [s for s in self.steps if s.chosen != TERMINATE]

    @property
    def terminated(self) -> bool:
        return bool(self.steps) and self.steps[-1].chosen == TERMINATE

    @property
    def actions(self) -> list:
        return [s.chosen for s in self.executed]

    def entropy_curve(self, nodes) -> list:
        """Summed entropy of ``nodes`` before the first step and after each executed step."""
        rows = [self.initial_entropies] + [s.entropies for s in self.executed]
        return [sum(r[n] for n in nodes) for r in rows]

    def to_dict(self) -> dict:
        return {
            "object": self.object,
            "mode": self.mode,
            "policy": self.policy,
            "seed": self.seed,
            "run_index": self.run_index,
            "initial_entropies": dict(self.initial_entropies),
            "initial_cross_entropies": dict(self.initial_cross_entropies),
            "steps": [s.to_dict() for s in self.steps],
        }

    @classmethod
    def from_dict(cls, d) -> "EpisodeTrace":
        return cls(
            object=d["object"],
            mode=d["mode"],
            policy=d["policy"],
            seed=d["seed"],
            run_index=d.get("run_index", 0),
            initial_entropies=d["initial_entropies"],
            initial_cross_entropies=d["initial_cross_entropies"],
            steps=[StepRecord.from_dict(s) for s in d["steps"]],
        )


def evaluate_actions(state: NetworkState, available: Sequence[ActionSpec], targets) -> list:
    return [expected_information_gain(state, a, targets) for a in available]


def select_action(
    state: NetworkState,
    available: Sequence[ActionSpec],
    targets,
    policy: str = ACTSEL,
    rng: Optional[np.random.Generator] = None,
    *,
    terminate: bool = False,
    evaluations: Optional[Sequence[ActionEvaluation]] = None,
):
    """Pick the next action (an ``ActionSpec``) or return ``TERMINATE``.

    ACTSEL takes the largest expected IG, earliest action on ties, and stops
    when ``terminate`` is set and no action has positive expected IG. RAND
    picks uniformly with ``rng`` and never stops early.
    """
    if not available:
        raise ValueError("no actions available")
    if policy == RAND:
        if rng is None:
            raise ValueError("RAND needs a random generator")
        return available[int(rng.integers(len(available)))]
    if policy != ACTSEL:
        raise ValueError(f"unknown policy {policy!r}")
    if evaluations is None:
        evaluations = evaluate_actions(state, available, targets)
    gains = np.array([e.expected_ig for e in evaluations])
    if terminate and np.all(gains <= 0):
        return TERMINATE
    return available[int(np.argmax(gains))]


def action_rngs(seed: int, n_actions: int):
    policy_rng = np.random.default_rng([seed, 0])
    return policy_rng, [np.random.default_rng([seed, i + 1]) for i in range(n_actions)]


def _snapshot(state: NetworkState, obj: GroundTruthObject):
    ce = {
        CATEGORY: cross_entropy(state.category, obj.true_category),
        MATERIAL: cross_entropy(state.material, obj.true_material),
    }
    return node_entropies(state), ce


def run_episode(
    obj: GroundTruthObject,
    config: EpisodeConfig,
    state: NetworkState,
    actions: Sequence[ActionSpec],
    *,
    run_index: int = 0,
    keep_states: bool = False,
    summarize_steps: bool = False,
) -> EpisodeTrace:
    """Select, simulate and apply actions until termination or exhaustion."""
    if config.max_steps > len(actions):
        raise ValueError("max_steps exceeds the number of actions (no replacement)")
    targets = check_target_set(target_set(config.optimization_mode))
    tables = state.model.tables
    policy_rng, rngs = action_rngs(config.seed, len(actions))
    stream = {a.name: r for a, r in zip(actions, rngs)}

    entropies, ce = _snapshot(state, obj)
    trace = EpisodeTrace(
        obj.name,
        config.optimization_mode,
        config.policy,
        config.seed,
        run_index,
        initial_entropies=entropies,
        initial_cross_entropies=ce,
    )
    if keep_states:
        trace.states.append(state)
    available = list(actions)
    for k in range(1, config.max_steps + 1):
        if not available:
            break
        evaluations = evaluate_actions(state, available, targets)
        choice = select_action(
            state,
            available,
            targets,
            config.policy,
            policy_rng,
            terminate=config.terminate_on_nonpositive_ig and config.policy == ACTSEL,
            evaluations=evaluations,
        )
        names = [a.name for a in available]
        if choice == TERMINATE:
            trace.steps.append(StepRecord(k, names, evaluations, TERMINATE))
            break
        outcome = simulate_measurement(choice, obj, stream[choice.name], tables)
        before = state
        state = apply_outcome(state, outcome, choice)
        entropies, ce = _snapshot(state, obj)
        trace.steps.append(
            StepRecord(
                k,
                names,
                evaluations,
                choice.name,
                outcome,
                network_entropy(before, targets) - network_entropy(state, targets),
                entropies,
                ce,
                summarize(state) if summarize_steps else {},
            )
        )
        if keep_states:
            trace.states.append(state)
        available.remove(choice)
    return trace
