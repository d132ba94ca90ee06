"""Search drivers: fixed step count, unknown preimage count, early stopping.

Each driver measures the message register of a simulated search run and
validates the outcome against the classical hash, reporting oracle calls as
one call per amplification step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import GroverRunner
from .hashes import HashInstance
from .oracles import (OracleSpec, build_grover_prep, build_grover_step,
                      layout_for, sponge_layout)
from .sim import as_rng

LAMBDA_DEFAULT = 6.0 / 5.0


@dataclass
class GroverRunConfig:
    """Knobs for one driver invocation."""

    instance: HashInstance
    steps: int | None = None
    lam: float = LAMBDA_DEFAULT
    max_samples: int = 10_000
    rng_seed: int = 0
    max_attempts: int = 100
    ancilla_budget: int = 2

    def __post_init__(self):
        if not 1.0 < self.lam <= 4.0 / 3.0:
            raise ValueError("lambda must lie in (1, 4/3]")


@dataclass(frozen=True)
class RunOutcome:
    measured_message: int
    is_preimage: bool
    oracle_calls: int
    samples_used: int
    exhausted: bool = False


def optimal_steps(space_size: int, num_preimages: int) -> int:
    """Step count maximising the success probability, about
    (pi/4) * sqrt(N/M); never below one, ties rounded down.
    """
    if num_preimages < 1:
        raise ValueError("no preimages to search for")
    if num_preimages > space_size:
        raise ValueError("more preimages than the search space holds")
    raw = (math.pi / 4.0) * math.sqrt(space_size / num_preimages) - 0.5
    return max(1, math.ceil(raw - 0.5))


def success_probability(space_size: int, num_preimages: int,
                        steps: int) -> float:
    """sin^2((2k+1) * asin(sqrt(M/N))), the exact amplification law."""
    theta = math.asin(math.sqrt(num_preimages / space_size))
    return math.sin((2 * steps + 1) * theta) ** 2


class GroverSimulation:
    """Cached evolution of one search instance.

    Builds the circuits once and exposes per-step message marginals; every
    driver below draws its measurements from these.
    """

    def __init__(self, instance: HashInstance, ancilla_budget: int = 2):
        if instance.kind != "sponge":
            raise ValueError(
                "statevector search runs are limited to the sponge "
                "construction; the wider compression circuit exceeds "
                "simulable width")
        if instance.num_preimages == 0:
            raise ValueError("instance has no preimages")
        self.instance = instance
        spec = OracleSpec(target_digest=instance.digest, hash_kind="sponge",
                          iv=instance.iv, ancilla_budget=ancilla_budget)
        self.layout = layout_for(spec)
        self.spec = spec
        self.runner = GroverRunner(build_grover_prep(self.layout),
                                   build_grover_step(spec, self.layout),
                                   self.layout)

    def marginal(self, steps: int) -> np.ndarray:
        return self.runner.marginal_after(steps)

    def preimage_probability(self, steps: int) -> float:
        marg = self.marginal(steps)
        return float(sum(marg[m] for m in self.instance.preimages))

    def sample_message(self, steps: int, rng) -> int:
        marg = self.marginal(steps)
        return int(as_rng(rng).choice(marg.size, p=marg / marg.sum()))


_SIM_CACHE: dict[tuple, GroverSimulation] = {}


def simulation_for(instance: HashInstance,
                   ancilla_budget: int = 2) -> GroverSimulation:
    key = (instance.kind, instance.iv, instance.digest, ancilla_budget)
    sim = _SIM_CACHE.get(key)
    if sim is None:
        sim = GroverSimulation(instance, ancilla_budget)
        _SIM_CACHE[key] = sim
    return sim


def run_known_m(config: GroverRunConfig) -> RunOutcome:
    """Amplify with a fixed (or derived-optimal) step count and measure."""
    instance = config.instance
    if instance.num_preimages == 0:
        raise ValueError("instance has no preimages")
    if config.steps is not None:
        steps = config.steps
    elif instance.num_preimages == instance.space_size:
        steps = 0  # every message already solves the instance
    else:
        steps = optimal_steps(instance.space_size, instance.num_preimages)
    sim = simulation_for(instance, config.ancilla_budget)
    rng = as_rng(config.rng_seed)
    message = sim.sample_message(steps, rng)
    return RunOutcome(measured_message=message,
                      is_preimage=instance.is_preimage(message),
                      oracle_calls=steps, samples_used=1)


def run_unknown_m(config: GroverRunConfig) -> RunOutcome:
    """Search without knowing the preimage count.

    Grows a step-count ceiling geometrically (factor lambda, capped at
    sqrt(N)), draws a uniform step count below it each attempt, measures,
    and stops on a classically verified hit. Oracle calls accumulate over
    every attempt, successful or not.
    """
    instance = config.instance
    if instance.num_preimages == 0:
        raise ValueError("instance has no preimages")
    if instance.num_preimages * 4 >= instance.space_size * 3:
        raise ValueError("requires fewer than 3N/4 solutions")
    sim = simulation_for(instance, config.ancilla_budget)
    rng = as_rng(config.rng_seed)
    sqrt_n = math.sqrt(instance.space_size)
    m = 1.0
    calls = 0
    for attempt in range(config.max_attempts):
        j = int(rng.integers(0, math.ceil(m)))
        message = sim.sample_message(j, rng)
        calls += j
        if instance.is_preimage(message):
            return RunOutcome(measured_message=message, is_preimage=True,
                              oracle_calls=calls, samples_used=attempt + 1)
        m = min(config.lam * m, sqrt_n)
    return RunOutcome(measured_message=message, is_preimage=False,
                      oracle_calls=calls, samples_used=config.max_attempts,
                      exhausted=True)


def run_early_stop(config: GroverRunConfig, steps: int) -> RunOutcome:
    """Stop the amplification early and sample repeatedly.

    Every sample re-runs the shortened circuit, so each costs ``steps``
    oracle calls. Stops at the first classically verified preimage or when
    the sample budget is exhausted.
    """
    instance = config.instance
    if instance.num_preimages == 0:
        raise ValueError("instance has no preimages")
    best = optimal_steps(instance.space_size, instance.num_preimages)
    if not 1 <= steps <= best:
        raise ValueError(f"steps must lie in [1, {best}]")
    sim = simulation_for(instance, config.ancilla_budget)
    rng = as_rng(config.rng_seed)
    for sample in range(1, config.max_samples + 1):
        message = sim.sample_message(steps, rng)
        if instance.is_preimage(message):
            return RunOutcome(measured_message=message, is_preimage=True,
                              oracle_calls=steps * sample,
                              samples_used=sample)
    return RunOutcome(measured_message=message, is_preimage=False,
                      oracle_calls=steps * config.max_samples,
                      samples_used=config.max_samples, exhausted=True)
