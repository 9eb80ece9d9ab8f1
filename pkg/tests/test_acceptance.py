"""Acceptance criteria 1-10, one test each.

Every test appends a PASS/FAIL line (with runtime) to ``ACCEPTANCE_LINES``;
conftest prints them at the end of the session.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from objexplore.actions import apply_outcome, simulate_measurement
from objexplore.beliefs import (
    CategoricalBelief,
    GaussianMixture,
    Grid,
    differential_entropy,
    discretize,
)
from objexplore.experiment import ExperimentConfig, run_experiment
from objexplore.infogain import (
    emulate_continuous_posterior,
    expected_categorical_entropy,
    expected_information_gain,
)
from objexplore.network import DEFAULT_GRIDS, estimate_mixture_weights, init_network, network_entropy
from objexplore.planner import ACTSEL, RAND, TERMINATE, select_action, target_set
from objexplore.reference import (
    CATEGORY,
    DENSITY,
    ELASTICITY,
    MATERIAL,
    NODES,
    TREE_EDGES,
    ActionSpec,
    EdgeTranslation,
)

SEED = 0


@contextmanager
def criterion(n, text, limit_s=None):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        dt = time.perf_counter() - t0
        ACCEPTANCE_LINES.append(f"FAIL  {n:>2}. {text} ({dt:.2f} s): {str(exc).splitlines()[0][:120]}")
        raise
    dt = time.perf_counter() - t0
    if limit_s is not None and dt >= limit_s:
        ACCEPTANCE_LINES.append(f"FAIL  {n:>2}. {text} ({dt:.2f} s, limit {limit_s} s)")
        pytest.fail(f"criterion {n} took {dt:.2f} s (limit {limit_s} s)")
    ACCEPTANCE_LINES.append(f"PASS  {n:>2}. {text} ({dt:.2f} s)")


@pytest.fixture(scope="module")
def default_runs(data, tmp_path_factory):
    """The default simulated experiment, twice, with identical base seed."""
    runs = []
    for i in range(2):
        out = tmp_path_factory.mktemp(f"default{i}")
        cfg = ExperimentConfig(repetitions=5, termination=False, seed=SEED, output_dir=str(out))
        t0 = time.perf_counter()
        res = run_experiment(cfg, data, keep_states=(i == 0))
        runs.append((res, time.perf_counter() - t0))
    return runs


def test_c01_entropy_identities(data):
    with criterion(1, "fresh Category entropy log2(10), Material 3 bits", 1.0):
        state = init_network(data.tables, data.edges)
        h_c = network_entropy(state, [CATEGORY])
        h_m = network_entropy(state, [MATERIAL])
        assert abs(h_c - math.log2(10)) < 1e-6, h_c
        assert abs(h_c - 3.3219) < 1e-4
        assert abs(h_m - 3.0) < 1e-6, h_m


def row_entropy(row):
    row = row[row > 0]
    return float(-(row * np.log2(row)).sum())


def test_c02_categorical_entropy_monte_carlo(actions):
    with criterion(2, "expected categorical entropy equals a 1e5-sample Monte-Carlo mean within 0.05 bits", 30.0):
        rng = np.random.default_rng(SEED)
        for name in ("cat-vision", "mat-vision", "mat-sound"):
            conf = actions[name].confusion
            k = conf.shape[0]
            prior = np.full(k, 1.0 / k)
            # true label ~ prior, measured label ~ confusion row of the truth
            truth = rng.choice(k, size=100_000, p=prior)
            u = rng.random(100_000)
            measured = np.minimum((u[:, None] > np.cumsum(conf, axis=1)[truth]).sum(axis=1), k - 1)
            h_rows = np.array([row_entropy(conf[i]) for i in range(k)])
            mc = h_rows[measured].mean()
            exact = expected_categorical_entropy(prior, conf)
            assert abs(exact - mc) < 0.05, (name, exact, mc)


def test_c03_convolution_entropy():
    with criterion(3, "N(100,10) convolved with N(0,10^2) has entropy 5.8706 +- 0.02 bits", 1.0):
        grid = Grid(0.0, 200.0, 1024)
        pdf = discretize(GaussianMixture([100.0], [10.0], [1.0]), grid)
        h = differential_entropy(emulate_continuous_posterior(pdf, 10.0))
        assert abs(h - 5.8706) <= 0.02, h
        assert abs(h - 0.5 * math.log2(2 * math.pi * math.e * 200)) <= 0.02, h


def test_c04_em_weight_recovery(tables):
    with criterion(4, "EM recovers 0.5 ceramic / 0.5 metal within 0.02, others < 0.01", 5.0):
        pdf = discretize(
            GaussianMixture([2300.0, 7900.0], [100.0, 600.0], [0.5, 0.5]), DEFAULT_GRIDS[DENSITY]
        )
        comps = {lab: tuple(r) for lab, r in zip(tables.material_labels, tables.density_by_material)}
        w = dict(zip(tables.material_labels, estimate_mixture_weights(pdf, comps)))
        assert abs(w["ceramic"] - 0.5) <= 0.02, w
        assert abs(w["metal"] - 0.5) <= 0.02, w
        assert sum(v for k, v in w.items() if k not in ("ceramic", "metal")) < 0.01, w


def test_c05_first_action_cat_vision(data):
    with criterion(5, "ACTSEL picks cat-vision first for 17 objects x 5 reps", 60.0):
        cfg = ExperimentConfig(repetitions=5, policies=(ACTSEL,), max_steps=1, seed=SEED)
        res = run_experiment(cfg, data)
        firsts = [t.steps[0].chosen for t in res.traces]
        assert len(firsts) == 85
        assert firsts.count("cat-vision") == 85, {a: firsts.count(a) for a in set(firsts)}


def test_c06_actsel_beats_rand(default_runs):
    res, elapsed = default_runs[0]
    text = "ACTSEL Category entropy >= 0.3 bits below RAND at step 1 and <= RAND at every step"
    with criterion(6, f"{text}; experiment {elapsed:.1f} s of 300 s"):
        assert elapsed < 300, f"default experiment took {elapsed:.1f} s"
        assert len(res.traces) == 170
        assert sum(len(t.executed) for t in res.traces) <= 850
        act = res.metrics.series("Category", ACTSEL, "target_entropy_mean_bits")
        rnd = res.metrics.series("Category", RAND, "target_entropy_mean_bits")
        assert len(act) == len(rnd) == 6
        assert rnd[1] - act[1] >= 0.3, (act, rnd)
        assert all(a <= r for a, r in zip(act, rnd)), (act, rnd)
    ACCEPTANCE_LINES.append(
        "        mean Category entropy ACTSEL " + " ".join(f"{v:.3f}" for v in act)
        + " | RAND " + " ".join(f"{v:.3f}" for v in rnd)
    )


def test_c07_termination(tables, data):
    with criterion(7, "only uniform-confusion actions left: immediate TERMINATE, all expected IG <= 0", 1.0):
        # Edge translations that carry no information, so a blind action gains
        # nothing anywhere in the network.
        edges = []
        for a, b in TREE_EDGES:
            ka, kb = tables.cardinality(a), tables.cardinality(b)
            edges.append(EdgeTranslation(a, b, np.full((ka, kb), 1 / kb)))
            edges.append(EdgeTranslation(b, a, np.full((kb, ka), 1 / ka)))
        state = init_network(tables, edges)
        blind = [
            ActionSpec("cat-vision", CATEGORY, "categorical", confusion=np.full((10, 10), 0.1)),
            ActionSpec("mat-vision", MATERIAL, "categorical", confusion=np.full((8, 8), 0.125)),
            ActionSpec("mat-sound", MATERIAL, "categorical", confusion=np.full((8, 8), 0.125)),
        ]
        for mode in ("Category", "Material", "Category+Material"):
            targets = target_set(mode)
            gains = [expected_information_gain(state, a, targets).expected_ig for a in blind]
            assert all(g <= 0 for g in gains), (mode, gains)
            assert select_action(state, blind, targets, ACTSEL, terminate=True) == TERMINATE


def test_c08_normalization(default_runs):
    res, _ = default_runs[0]
    with criterion(8, "every step of the default run: PMFs sum to 1 (1e-9), PDFs integrate to 1 (1e-6)"):
        checked = 0
        for t in res.traces:
            assert len(t.states) == len(t.executed) + 1
            for state in t.states:
                for node in NODES:
                    b = state[node]
                    if isinstance(b, CategoricalBelief):
                        assert abs(b.probs.sum() - 1) <= 1e-9, (t.object, node)
                    else:
                        assert abs(b.density.sum() * b.grid.bin_width - 1) <= 1e-6, (t.object, node)
                checked += 1
        assert checked == 170 * 6


def test_c09_censored_squeeze(data, fresh, actions):
    with criterion(9, "150 kPa squeeze censored in >= 99.9% of 1e4 runs; posterior has no mass below 95 kPa"):
        squeeze = actions["squeezing"]
        truth = data.object("ceramic-mug")
        assert truth.elasticity == 150.0
        rng = np.random.default_rng(SEED)
        outs = [simulate_measurement(squeeze, truth, rng, data.tables) for _ in range(10_000)]
        frac = np.mean([o.censored for o in outs])
        assert frac >= 0.999, frac
        post = apply_outcome(fresh, next(o for o in outs if o.censored), squeeze)
        assert post[ELASTICITY].mass_below(95.0) == 0.0


def test_c10_determinism(default_runs):
    (a, _), (b, _) = default_runs
    with criterion(10, "two default runs with the same seed give byte-identical traces and metrics"):
        for name in ("traces.jsonl", "metrics.csv", "manifest.json"):
            assert (a.output_dir / name).read_bytes() == (b.output_dir / name).read_bytes(), name
