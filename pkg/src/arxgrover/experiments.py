"""Seeded experiment procedures emitting tabular, CSV-ready results.

Each experiment captures one published-style analysis: probability
evolution across amplification steps, early-stopping statistics, search
cost with unknown preimage count, entanglement profiles, and Pauli-noise
robustness. Rows are plain tuples under a stable column contract (the
plotting frontend consumes the CSVs by column name), every run is seeded,
and noiseless experiments reproduce bit-exactly for a given seed.

Default search instances are discovered by brute force over the hash
rather than hardcoded: the initial-state constant below is the smallest
capacity value whose digest table realises every preimage multiplicity
the experiments need, and the entanglement runs use instances whose
preimage sets factorise across the probed message split (see
``separable_message_split``), which is what keeps their post-step
entropies inside the two-state bound.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, hashes
from .engine import GroverRunner
from .grover import (GroverRunConfig, optimal_steps, run_unknown_m,
                     simulation_for, success_probability)
from .hashes import HashInstance
from .oracles import (MIDPOINT_MARKER, OracleSpec, build_grover_prep,
                      build_grover_step, sponge_layout)
from .sim import Bipartition, NoiseModel, StateVector

# Smallest capacity byte whose digest table contains instances with
# 1..6 preimages (rate bits of the initial state only relabel messages,
# so only the capacity byte matters). Verified by test against
# find_default_iv().
DEFAULT_IV = 0x1200

# Instances for the entanglement profiles: (initial state, digest,
# message-bit subset). Each preimage set factorises across the subset /
# complement split; M = 1 needs no structure. Verified by test against
# find_entropy_case().
ENTROPY_CASES = {
    1: (0x1200, 0x01, (0, 1, 2, 3)),
    2: (0x1200, 0x00, (0, 1, 2, 4)),
    3: (0x1200, 0xCC, (0, 4, 5, 7)),
    4: (0x0300, 0x68, (0, 2, 6, 7)),
}

# Half the permutation-matrix qubits: the mid-oracle probe cut.
MID_STEP_SUBSYSTEM = frozenset(range(8))


@dataclass
class ExperimentResult:
    name: str
    parameters: dict
    columns: tuple[str, ...]
    rows: list[tuple]
    seed: int
    wall_time: float = 0.0

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            writer.writerows(self.rows)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def write_result(result: ExperimentResult, out_dir) -> Path:
    """Write the experiment CSV and merge its entry into manifest.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{result.name}.csv"
    result.write_csv(csv_path)
    manifest_path = out / "manifest.json"
    manifest = {}
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
    manifest[result.name] = {
        "csv": csv_path.name,
        "parameters": result.parameters,
        "seed": result.seed,
        "wall_time_s": round(result.wall_time, 3),
        "columns": list(result.columns),
        "versions": {
            "arxgrover": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return csv_path


# ---------------------------------------------------------------------------
# Instance discovery.

def instance_with_preimages(m: int, iv: int = DEFAULT_IV) -> HashInstance:
    """Lowest digest with exactly m preimages under the given constant."""
    table = hashes.sponge_digest_table(iv)
    counts = np.bincount(table, minlength=256)
    hits = np.nonzero(counts == m)[0]
    if hits.size == 0:
        raise ValueError(f"no digest with {m} preimages for iv {iv:#06x}")
    return hashes.sponge_instance(int(hits[0]), iv)


def find_default_iv(required=(1, 2, 3, 4, 5, 6)) -> int:
    """Smallest capacity-byte constant realising all required counts."""
    for capacity in range(256):
        iv = capacity << 8
        counts = np.bincount(hashes.sponge_digest_table(iv), minlength=256)
        present = set(int(c) for c in counts)
        if all(m in present for m in required):
            return iv
    raise RuntimeError("no suitable initial state found")


def _project(message: int, bits) -> int:
    return sum(((message >> b) & 1) << i for i, b in enumerate(bits))


def separable_message_split(preimages) -> tuple[int, ...] | None:
    """A 4-bit message subset across which the preimage set is a product.

    Returns bits A such that the set equals {x} x Y, X x {y} or a full
    X x Y grid under the (A, complement) split, or None. A product set
    keeps the amplified state inside a rank-two family for that cut, so
    its entanglement entropy never exceeds one bit after a full step.
    """
    preimages = sorted(preimages)
    for a_bits in itertools.combinations(range(8), 4):
        b_bits = tuple(b for b in range(8) if b not in a_bits)
        pairs = {(_project(m, a_bits), _project(m, b_bits))
                 for m in preimages}
        xs = {x for x, _ in pairs}
        ys = {y for _, y in pairs}
        if len(xs) * len(ys) == len(pairs) == len(preimages):
            return a_bits
    return None


def find_entropy_case(m: int) -> tuple[int, int, tuple[int, ...]]:
    """First (initial state, digest, subset) usable for the entropy runs."""
    capacities = [DEFAULT_IV >> 8] + [c for c in range(256)
                                      if c != DEFAULT_IV >> 8]
    for capacity in capacities:
        iv = capacity << 8
        table = hashes.sponge_digest_table(iv)
        counts = np.bincount(table, minlength=256)
        for digest in np.nonzero(counts == m)[0]:
            preimages = [int(x) for x in np.nonzero(table == digest)[0]]
            if m == 1:
                return iv, int(digest), (0, 1, 2, 3)
            split = separable_message_split(preimages)
            if split is not None:
                return iv, int(digest), split
    raise RuntimeError(f"no separable instance with {m} preimages")


def entropy_instance(m: int) -> tuple[HashInstance, tuple[int, ...]]:
    iv, digest, subset = ENTROPY_CASES[m]
    return hashes.sponge_instance(digest, iv), subset


# ---------------------------------------------------------------------------
# Experiments.

def probability_evolution(instance: HashInstance,
                          max_steps: int | None = None,
                          seed: int = 0) -> ExperimentResult:
    """Per-message measurement probabilities after each step count."""
    if instance.num_preimages == 0:
        raise ValueError("instance has no preimages")
    t0 = time.perf_counter()
    sim = simulation_for(instance)
    if max_steps is None:
        max_steps = optimal_steps(instance.space_size,
                                  instance.num_preimages) + 4
    rows = []
    for k in range(max_steps + 1):
        marginal = sim.marginal(k)
        for message in range(instance.space_size):
            rows.append((k, message, float(marginal[message]),
                         int(instance.is_preimage(message))))
    return ExperimentResult(
        name="probability-evolution",
        parameters={"iv": instance.iv, "digest": instance.digest,
                    "preimages": instance.num_preimages,
                    "max_steps": max_steps},
        columns=("step", "message", "probability", "is_preimage"),
        rows=rows, seed=seed, wall_time=time.perf_counter() - t0)


def early_stop_table(ms=(2, 4, 6), iv: int = DEFAULT_IV,
                     trials: int = 10_000, seed: int = 0) -> ExperimentResult:
    """Success probability and mean samples-to-first-hit per step count.

    The per-sample success probability is exact (read off the state); the
    sample count to the first hit is a seeded empirical mean over
    ``trials`` repetitions of measure-until-preimage, each sample costing
    one shortened run.
    """
    t0 = time.perf_counter()
    root = np.random.SeedSequence(seed)
    rows = []
    for m, child in zip(ms, root.spawn(len(ms))):
        instance = instance_with_preimages(m, iv)
        sim = simulation_for(instance)
        best = optimal_steps(instance.space_size, m)
        rng = np.random.default_rng(child)
        for steps in range(1, best + 1):
            marginal = sim.marginal(steps)
            p = float(sum(marginal[x] for x in instance.preimages))
            samples = rng.geometric(p, size=trials)
            mean = float(samples.mean())
            sem = float(samples.std(ddof=1) / math.sqrt(trials))
            rows.append((m, steps, p, mean, sem, steps * mean))
    return ExperimentResult(
        name="early-stop",
        parameters={"iv": iv, "preimage_counts": list(ms), "trials": trials},
        columns=("preimages", "steps", "success_probability",
                 "mean_samples", "sem_samples", "expected_oracle_calls"),
        rows=rows, seed=seed, wall_time=time.perf_counter() - t0)


def unknown_m_statistics(ms=(2, 4, 6), iv: int = DEFAULT_IV,
                         trials: int = 1000, seed: int = 0) -> ExperimentResult:
    """Mean oracle calls of the growing-ceiling search, per preimage count."""
    t0 = time.perf_counter()
    root = np.random.SeedSequence(seed)
    rows = []
    for m, child in zip(ms, root.spawn(len(ms))):
        instance = instance_with_preimages(m, iv)
        n = instance.space_size
        calls = []
        for trial_seed in child.spawn(trials):
            config = GroverRunConfig(instance=instance,
                                     rng_seed=np.random.default_rng(trial_seed))
            outcome = run_unknown_m(config)
            calls.append(outcome.oracle_calls)
        calls = np.array(calls, dtype=float)
        rows.append((m, trials, float(calls.mean()),
                     float(calls.std(ddof=1) / math.sqrt(trials)),
                     optimal_steps(n, m), 2.25 * math.sqrt(n / m)))
    return ExperimentResult(
        name="unknown-m",
        parameters={"iv": iv, "preimage_counts": list(ms), "trials": trials},
        columns=("preimages", "trials", "mean_oracle_calls", "sem_calls",
                 "optimal_steps", "call_upper_bound"),
        rows=rows, seed=seed, wall_time=time.perf_counter() - t0)


def _entropy_runner(instance: HashInstance) -> tuple[GroverRunner, object]:
    spec = OracleSpec(target_digest=instance.digest, hash_kind="sponge",
                      iv=instance.iv)
    layout = sponge_layout(spec.ancilla_budget)
    step = build_grover_step(spec, layout)
    return GroverRunner(build_grover_prep(layout), step, layout), step


def entropy_profile(m: int = 2, steps: int | None = None,
                    seed: int = 0) -> ExperimentResult:
    """Entanglement entropy inside and after each amplification step.

    Inside: right after the digest check, across half the permutation
    matrix. After: across the instance's factorising message split, where
    the state stays within the solutions/non-solutions plane and the
    entropy is capped at one bit.
    """
    t0 = time.perf_counter()
    instance, subset = entropy_instance(m)
    runner, _ = _entropy_runner(instance)
    if steps is None:
        steps = optimal_steps(instance.space_size, instance.num_preimages)
    mid_cut = Bipartition(MID_STEP_SUBSYSTEM)
    post_cut = Bipartition(frozenset(subset))
    rows = []
    for k in range(1, steps + 1):
        mid = runner.midpoint_state(k - 1).to_statevector()
        mid_entropy = mid.entanglement_entropy(mid_cut)
        post = runner.state_after(k).to_statevector()
        post_entropy = post.entanglement_entropy(post_cut)
        rows.append((k, mid_entropy, post_entropy))
    return ExperimentResult(
        name="entropy",
        parameters={"iv": instance.iv, "digest": instance.digest,
                    "preimages": m, "message_subset": list(subset),
                    "steps": steps},
        columns=("step", "mid_step_entropy", "post_step_entropy"),
        rows=rows, seed=seed, wall_time=time.perf_counter() - t0)


def entropy_scan(m: int = 2, seed: int = 0) -> ExperimentResult:
    """Gate-by-gate entropy through the first oracle application.

    Gates acting wholly inside either side of the cut cannot move the
    reduced spectrum, so their rows repeat the previous value rather than
    recomputing it.
    """
    t0 = time.perf_counter()
    instance, _ = entropy_instance(m)
    runner, step = _entropy_runner(instance)
    resolved = step.instantiate()
    end = resolved.markers["oracle_end"]
    cut = Bipartition(MID_STEP_SUBSYSTEM)
    a_side = MID_STEP_SUBSYSTEM
    layout = sponge_layout()
    state = StateVector(layout.width).run(build_grover_prep(layout))
    rows = []
    value = 0.0
    for index, gate in enumerate(resolved.gates[:end]):
        state.apply(gate)
        touched = set(gate.qubits)
        if touched & a_side and touched - a_side:
            value = state.entanglement_entropy(cut)
        rows.append((index, gate.kind, value))
    return ExperimentResult(
        name="entropy-scan",
        parameters={"iv": instance.iv, "digest": instance.digest,
                    "preimages": m, "gates": end,
                    "max_entropy": max(r[2] for r in rows)},
        columns=("gate_index", "gate_kind", "entropy"),
        rows=rows, seed=seed, wall_time=time.perf_counter() - t0)


DEFAULT_NOISE_PROBABILITIES = (0.0, 5e-6, 1e-5, 2e-5, 3e-5, 5e-5, 1e-4)


def noise_sweep(probabilities=DEFAULT_NOISE_PROBABILITIES,
                trajectories: int = 250, m: int = 2, iv: int = DEFAULT_IV,
                seed: int = 0, mode: str = "independent") -> ExperimentResult:
    """Preimage-recovery probability under Pauli noise, two strategies.

    At every error rate and equal oracle budget: (full) all amplification
    steps, one readout; (half) half the steps, two independent runs. Each
    trial's recovery probability is read exactly off the trajectory's
    final state; means aggregate over ``trajectories`` seeded trials.
    """
    t0 = time.perf_counter()
    instance = instance_with_preimages(m, iv)
    sim = simulation_for(instance)
    runner = sim.runner
    preimages = sorted(instance.preimages)
    full = optimal_steps(instance.space_size, instance.num_preimages)
    half = max(1, full // 2)
    baseline_one = instance.num_preimages / instance.space_size
    strategies = {
        "full": (full, 1, baseline_one),
        "half": (half, 2, 1.0 - (1.0 - baseline_one) ** 2),
    }
    root = np.random.SeedSequence(seed)
    rows = []
    for p, child in zip(probabilities, root.spawn(len(probabilities))):
        noise = NoiseModel(p, mode=mode)
        for (name, (steps, samples, baseline)), branch in zip(
                strategies.items(), child.spawn(len(strategies))):
            rng_stream = np.random.default_rng(branch)
            values = np.empty(trajectories)
            for t in range(trajectories):
                miss = 1.0
                for _ in range(samples):
                    final = runner.run_noisy(steps, noise, rng_stream)
                    hit = float(final.marginal_low(8)[preimages].sum())
                    miss *= 1.0 - hit
                values[t] = 1.0 - miss
            rows.append((p, name, trajectories, steps, samples,
                         float(values.mean()),
                         float(values.std(ddof=1) / math.sqrt(trajectories)),
                         baseline))
    return ExperimentResult(
        name="noise",
        parameters={"iv": iv, "digest": instance.digest, "preimages": m,
                    "trajectories": trajectories, "mode": mode,
                    "probabilities": list(probabilities)},
        columns=("pauli_probability", "strategy", "trials", "steps",
                 "samples", "mean_success", "sem_success", "baseline"),
        rows=rows, seed=seed, wall_time=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Registry for the CLI.

def _run_probability_evolution(seed: int, m: int = 2, iv: int = DEFAULT_IV,
                               max_steps: int | None = None):
    return probability_evolution(instance_with_preimages(m, iv),
                                 max_steps=max_steps, seed=seed)


EXPERIMENTS = {
    "probability-evolution": _run_probability_evolution,
    "early-stop": lambda seed, **kw: early_stop_table(seed=seed, **kw),
    "unknown-m": lambda seed, **kw: unknown_m_statistics(seed=seed, **kw),
    "entropy": lambda seed, **kw: entropy_profile(seed=seed, **kw),
    "entropy-scan": lambda seed, **kw: entropy_scan(seed=seed, **kw),
    "noise": lambda seed, **kw: noise_sweep(seed=seed, **kw),
}
