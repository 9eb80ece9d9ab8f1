"""Batch experiments, metrics aggregation, measurement-log export, interactive runs."""

from __future__ import annotations

import csv
import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from functools import partial
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .actions import MeasurementError, MeasurementOutcome, apply_outcome
from .infogain import expected_information_gain
from .network import NetworkState, init_network, network_entropy, node_entropies, summarize
from .planner import (
    ACTSEL,
    POLICIES,
    TERMINATE,
    EpisodeConfig,
    EpisodeTrace,
    StepRecord,
    cross_entropy,
    run_episode,
    select_action,
    target_set,
)
from .reference import (
    CANONICAL_UNIT,
    CATEGORY,
    MATERIAL,
    UNITS,
    ReferenceData,
    load_reference_data,
    select_objects,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "MetricsTable",
    "aggregate_metrics",
    "cross_entropy",
    "export_measurement_log",
    "interactive_session",
    "parse_measurement_record",
    "read_traces",
    "run_experiment",
]

TRACES_FILE = "traces.jsonl"
METRICS_FILE = "metrics.csv"
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class ExperimentConfig:
    objects: tuple = ()  # empty = whole catalog
    repetitions: int = 5
    modes: tuple = ("Category",)
    policies: tuple = POLICIES
    termination: bool = False
    seed: int = 0
    output_dir: Optional[str] = None
    max_steps: int = 5
    config_dir: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for m in self.modes:
            target_set(m)
        for p in self.policies:
            if p not in POLICIES:
                raise ValueError(f"unknown policy {p!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("jobs")  # does not affect results
        d.pop("output_dir")  # the manifest lives there; keeps reruns byte-identical
        d["objects"] = list(self.objects)
        d["modes"] = list(self.modes)
        d["policies"] = list(self.policies)
        return d


def run_seed(base: int, run_index: int) -> int:
    return base ^ run_index


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


@dataclass
class MetricsTable:
    """Per (mode, policy, step) statistics over runs; step 0 is the prior."""

    actions: list
    rows: list = field(default_factory=list)

    @property
    def columns(self) -> list:
        base = [
            "mode",
            "policy",
            "step",
            "n_runs",
            "n_executed",
            "target_entropy_mean_bits",
            "target_entropy_sd_bits",
            "ce_category_mean_bits",
            "ce_category_sd_bits",
            "ce_material_mean_bits",
            "ce_material_sd_bits",
        ]
        return base + [f"count_{a}" for a in self.actions]

    def row(self, mode: str, policy: str, step: int) -> dict:
        for r in self.rows:
            if (r["mode"], r["policy"], r["step"]) == (mode, policy, step):
                return r
        raise KeyError((mode, policy, step))

    def series(self, mode: str, policy: str, column: str) -> list:
        rows = sorted(
            (r for r in self.rows if r["mode"] == mode and r["policy"] == policy),
            key=lambda r: r["step"],
        )
        return [r[column] for r in rows]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=self.columns, lineterminator="\n")
            writer.writeheader()
            for r in self.rows:
                writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})

    @classmethod
    def from_csv(cls, path) -> "MetricsTable":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            actions = [c[len("count_"):] for c in reader.fieldnames if c.startswith("count_")]
            rows = []
            for raw in reader:
                r = {}
                for k, v in raw.items():
                    if k in ("mode", "policy"):
                        r[k] = v
                    elif k == "step" or k.startswith("n_") or k.startswith("count_"):
                        r[k] = int(v)
                    else:
                        r[k] = float(v)
                rows.append(r)
        return cls(actions, rows)


def _carry(values: list, n: int) -> list:
    return values + [values[-1]] * (n - len(values))


def aggregate_metrics(
    traces: Sequence[EpisodeTrace],
    actions: Optional[Sequence[str]] = None,
    n_steps: Optional[int] = None,
) -> MetricsTable:
    """Mean/SD of entropies and cross-entropies per step, and action counts.

    A run that terminated early carries its last values forward so every
    curve is defined at every step; it no longer counts toward action counts.
    SDs are population SDs (0 for a single run). ``n_steps`` defaults to the
    longest trace.
    """
    if not traces:
        raise ValueError("no traces to aggregate")
    if actions is None:
        seen = []
        for t in traces:
            for s in t.steps:
                for a in s.available:
                    if a not in seen:
                        seen.append(a)
        actions = seen
    table = MetricsTable(list(actions))
    groups = {}
    for t in traces:
        groups.setdefault((t.mode, t.policy), []).append(t)
    for (mode, policy), group in groups.items():
        nodes = target_set(mode)
        steps = n_steps if n_steps is not None else max(len(t.steps) for t in group)
        ent, ce_c, ce_m = [], [], []
        for t in group:
            ent.append(_carry(t.entropy_curve(nodes), steps + 1))
            ce_rows = [t.initial_cross_entropies] + [s.cross_entropies for s in t.executed]
            ce_c.append(_carry([r[CATEGORY] for r in ce_rows], steps + 1))
            ce_m.append(_carry([r[MATERIAL] for r in ce_rows], steps + 1))
        ent, ce_c, ce_m = (np.array(a) for a in (ent, ce_c, ce_m))
        for k in range(steps + 1):
            counts = {a: 0 for a in actions}
            for t in group:
                if 1 <= k <= len(t.executed):
                    counts[t.executed[k - 1].chosen] += 1
            row = {
                "mode": mode,
                "policy": policy,
                "step": k,
                "n_runs": len(group),
                "n_executed": sum(counts.values()),
                "target_entropy_mean_bits": float(ent[:, k].mean()),
                "target_entropy_sd_bits": float(ent[:, k].std()),
                "ce_category_mean_bits": float(ce_c[:, k].mean()),
                "ce_category_sd_bits": float(ce_c[:, k].std()),
                "ce_material_mean_bits": float(ce_m[:, k].mean()),
                "ce_material_sd_bits": float(ce_m[:, k].std()),
            }
            row.update({f"count_{a}": c for a, c in counts.items()})
            table.rows.append(row)
    return table


# ---------------------------------------------------------------------------
# Batch runner
# ---------------------------------------------------------------------------


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: list
    metrics: MetricsTable
    output_dir: Optional[Path] = None


def _run_job(job, state: NetworkState, data: ReferenceData, objects, config: ExperimentConfig,
             keep_states: bool = False):
    mode, policy, oi, rep = job
    run_index = oi * config.repetitions + rep
    ep = EpisodeConfig(
        optimization_mode=mode,
        policy=policy,
        terminate_on_nonpositive_ig=config.termination,
        max_steps=min(config.max_steps, len(data.actions)),
        seed=run_seed(config.seed, run_index),
    )
    return run_episode(objects[oi], ep, state, data.actions, run_index=run_index, keep_states=keep_states)


def run_experiment(
    config: ExperimentConfig, data: Optional[ReferenceData] = None, *, keep_states: bool = False
) -> ExperimentResult:
    """Run every (mode, policy, object, repetition) episode and aggregate.

    The seed of run ``i`` (object index * repetitions + repetition) is
    ``config.seed ^ i``; the same run index under different policies shares
    its measurement streams. ``keep_states`` attaches the network state after
    every step to each trace (memory heavy; not written to disk).
    """
    if data is None:
        data = load_reference_data(config.config_dir)
    objects = select_objects(data.catalog, config.objects)
    state = init_network(data.tables, data.edges)
    jobs = [
        (mode, policy, oi, rep)
        for mode in config.modes
        for policy in config.policies
        for oi in range(len(objects))
        for rep in range(config.repetitions)
    ]
    worker = partial(
        _run_job, state=state, data=data, objects=objects, config=config, keep_states=keep_states
    )
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            traces = list(pool.map(worker, jobs, chunksize=8))
    else:
        traces = [worker(j) for j in jobs]
    metrics = aggregate_metrics(
        traces, [a.name for a in data.actions], min(config.max_steps, len(data.actions))
    )
    result = ExperimentResult(config, traces, metrics)
    if config.output_dir is not None:
        result.output_dir = write_results(result, config.output_dir)
    return result


def write_results(result: ExperimentResult, output_dir) -> Path:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_traces(result.traces, out / TRACES_FILE)
    result.metrics.to_csv(out / METRICS_FILE)
    manifest = {
        "package": "objexplore",
        "version": __version__,
        "config": result.config.to_dict(),
        "n_traces": len(result.traces),
        "files": [TRACES_FILE, METRICS_FILE],
    }
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def write_traces(traces, path) -> None:
    with open(path, "w") as fh:
        for t in traces:
            fh.write(json.dumps(t.to_dict(), sort_keys=True) + "\n")


def read_traces(path) -> list:
    with open(path) as fh:
        return [EpisodeTrace.from_dict(json.loads(line)) for line in fh if line.strip()]


# ---------------------------------------------------------------------------
# Measurement log export
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasurementRecord:
    """One executed measurement, as written to the log tree."""

    object: str
    run_index: int
    policy: str
    mode: str
    step: int
    action: str
    outcome: MeasurementOutcome
    seed: int
    timestamp: str
    setup: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["outcome"] = self.outcome.to_dict()
        return d

    @classmethod
    def from_dict(cls, d) -> "MeasurementRecord":
        d = dict(d)
        d["outcome"] = MeasurementOutcome.from_dict(d["outcome"])
        return cls(**d)


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def export_measurement_log(
    traces: Sequence[EpisodeTrace],
    output_dir,
    *,
    setup: Optional[dict] = None,
    timestamp: Optional[str] = None,
) -> Path:
    """Write one JSON record per executed measurement.

    Layout: ``<output_dir>/<object>/run-<index>-<policy>-<mode>/step-<k>-<action>.json``
    plus ``manifest.json`` listing every record path.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    setup = dict(setup or {"robot": "simulated", "gripper": "simulated", "sensors": "simulated"})
    stamp = timestamp or datetime.now(timezone.utc).isoformat()
    written = []
    for t in traces:
        run_dir = out / _safe(t.object) / _safe(f"run-{t.run_index:03d}-{t.policy}-{t.mode}")
        run_dir.mkdir(parents=True, exist_ok=True)
        for s in t.executed:
            rec = MeasurementRecord(
                object=t.object,
                run_index=t.run_index,
                policy=t.policy,
                mode=t.mode,
                step=s.step,
                action=s.chosen,
                outcome=s.outcome,
                seed=t.seed,
                timestamp=stamp,
                setup=setup,
            )
            path = run_dir / f"step-{s.step}-{_safe(s.chosen)}.json"
            path.write_text(json.dumps(rec.to_dict(), indent=2, sort_keys=True) + "\n")
            written.append(path.relative_to(out).as_posix())
    manifest = {"version": __version__, "n_records": len(written), "records": written}
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def parse_measurement_record(path) -> MeasurementRecord:
    return MeasurementRecord.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Interactive session
# ---------------------------------------------------------------------------

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z0-9_/^.]*)\s*$")


def parse_quantity(text: str, quantity: str) -> float:
    """Parse ``"20 kPa"``, ``"0.15 kg"``, ``"150"`` into the canonical unit of ``quantity``."""
    m = _NUMBER.match(text)
    if not m:
        raise ValueError(f"cannot parse {text!r} as a number with units")
    value = float(m.group(1))
    unit = m.group(2).lower().replace("/", "_").replace("^", "")
    if not unit:
        unit = CANONICAL_UNIT[quantity]
    if unit not in UNITS[quantity]:
        raise ValueError(f"unit {m.group(2)!r} is not a {quantity} unit")
    return value * UNITS[quantity][unit]


def parse_outcome(text: str, action, labels) -> MeasurementOutcome:
    """Turn a human-entered reading into an outcome; raises ValueError if unparseable."""
    text = text.strip()
    if action.is_categorical:
        if text not in labels:
            raise ValueError(f"{text!r} is not one of: {', '.join(labels)}")
        return MeasurementOutcome(action.name, "categorical", label=text)
    unit = CANONICAL_UNIT[action.observable]
    threshold = action.censor_threshold
    if text.lower() == "censored":
        if threshold is None:
            raise ValueError(f"{action.name} readings cannot be censored")
        return MeasurementOutcome(action.name, "continuous", value=threshold, units=unit, censored=True)
    value = parse_quantity(text, action.observable)
    if value < 0:
        raise ValueError("readings must be non-negative")
    if threshold is not None and value > threshold:
        return MeasurementOutcome(action.name, "continuous", value=threshold, units=unit, censored=True)
    return MeasurementOutcome(action.name, "continuous", value=value, units=unit)


def format_summary(summary: dict) -> str:
    lines = []
    for node, s in summary.items():
        top = ", ".join(f"{lab} {p:.3f}" for lab, p in s["top"])
        if "probs" in s:
            lines.append(f"  {node:<10} H={s['entropy_bits']:.3f} bits  top: {top}")
        else:
            lines.append(
                f"  {node:<10} H={s['entropy_bits']:.3f} bits  mean={s['mean']:.4g} "
                f"sd={s['sd']:.4g}  components: {top}"
            )
    return "\n".join(lines)


def interactive_session(
    data: Optional[ReferenceData] = None,
    mode: str = "Category",
    *,
    terminate: bool = True,
    read: Callable[[str], str] = input,
    write: Callable[[str], None] = print,
    object_name: str = "interactive",
) -> EpisodeTrace:
    """ACTSEL loop where a person performs the measurements and types the results.

    Enter a label for categorical actions, a number with optional units for
    continuous ones (``censored`` for a saturated squeeze), or ``quit``.
    """
    if data is None:
        data = load_reference_data()
    targets = target_set(mode)
    state = init_network(data.tables, data.edges)
    trace = EpisodeTrace(object_name, mode, ACTSEL, 0, 0, node_entropies(state), {})
    available = list(data.actions)
    write(f"Optimizing {mode}. Initial beliefs:")
    write(format_summary(summarize(state)))
    step = 0
    while available:
        step += 1
        evaluations = [expected_information_gain(state, a, targets) for a in available]
        ranked = sorted(zip(evaluations, available), key=lambda p: -p[0].expected_ig)
        write(f"\nStep {step}: expected information gain")
        for ev, _ in ranked:
            write(f"  {ev.action:<12} {ev.expected_ig:+.4f} bits")
        choice = select_action(
            state, available, targets, ACTSEL, terminate=terminate, evaluations=evaluations
        )
        names = [a.name for a in available]
        if choice == TERMINATE:
            write("No action has positive expected information gain; stopping.")
            trace.steps.append(StepRecord(step, names, evaluations, TERMINATE))
            break
        labels = state.model.labels(choice.target_node) if choice.is_categorical else ()
        hint = "label" if choice.is_categorical else f"value in {CANONICAL_UNIT[choice.observable]}"
        if choice.censor_threshold is not None:
            hint += " or 'censored'"
        write(f"Recommended action: {choice.name}")
        while True:
            text = read(f"{choice.name} result ({hint}, or 'quit'): ")
            if text.strip().lower() in ("quit", "q", "exit"):
                write("Session ended.")
                return trace
            try:
                outcome = parse_outcome(text, choice, labels)
                before = state
                state = apply_outcome(state, outcome, choice)
            except (ValueError, MeasurementError) as exc:
                write(f"  not understood: {exc}")
                continue
            break
        summary = summarize(state)
        trace.steps.append(
            StepRecord(
                step,
                names,
                evaluations,
                choice.name,
                outcome,
                network_entropy(before, targets) - network_entropy(state, targets),
                node_entropies(state),
                {},
                summary,
            )
        )
        write(format_summary(summary))
        available.remove(choice)
    return trace
