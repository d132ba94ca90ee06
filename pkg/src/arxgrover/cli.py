"""Command-line entry point: hashing, enumeration, circuit dumps, scaling
estimates, search runs, and the experiment suite.

Defaults reproduce the desk-scale constructions (16-bit states, 10
permutation rounds, 12 compression rounds). All randomness flows from
--seed. Distinct failure modes exit with distinct codes: 2 usage, 3
infeasible simulation width, 4 empty preimage set, 5 invalid parameters.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import __version__, estimator, experiments, hashes
from .circuit import Circuit, count_resources, lower_circuit, reversible_run_bulk
from .grover import GroverRunConfig, optimal_steps, run_early_stop, run_known_m, run_unknown_m
from .oracles import (OracleSpec, blake_layout, build_diffusion, build_grover_prep,
                      build_grover_step, build_oracle, build_blake_oracle,
                      build_sponge_permutation, layout_for, sponge_layout)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NO_PREIMAGE = 4
EXIT_BAD_PARAMETER = 5


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_BAD_PARAMETER):
        super().__init__(message)
        self.code = code


def _int(value: str) -> int:
    return int(value, 0)


def _out_dir(args):
    return args.out or os.environ.get("ARXGROVER_OUT", ".")


def _emit_rows(columns, rows, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps([dict(zip(columns, row)) for row in rows], indent=2))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(columns)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# Subcommands.

def cmd_hash(args) -> int:
    if args.kind == "sponge":
        digest = hashes.sponge_hash(args.message, iv=args.iv,
                                    rounds=args.rounds)
    else:
        if not 0 <= args.message < (1 << 16):
            raise CliError("compression message blocks are 16-bit")
        digest = hashes.blake_compress(args.message, t=args.counter,
                                       is_last=not args.not_last,
                                       rho=args.rho)
    print(f"{digest:#04x}")
    return EXIT_OK


def cmd_preimages(args) -> int:
    if args.kind == "sponge":
        table = hashes.sponge_digest_table(args.iv, args.rounds)
        bits = 8
    else:
        table = hashes.blake_digest_table(args.counter, not args.not_last,
                                          args.rho)
        bits = 16
    if args.table:
        _emit_rows(("message", "digest"),
                   [(m, int(table[m])) for m in range(1 << bits)],
                   args.format)
        return EXIT_OK
    rows = []
    for digest in range(256):
        pre = np.nonzero(table == digest)[0]
        if args.digest is not None and digest != args.digest:
            continue
        rows.append((digest, len(pre),
                     " ".join(str(int(p)) for p in pre)))
    _emit_rows(("digest", "preimages", "messages"), rows, args.format)
    return EXIT_OK


def _build_named_circuit(args) -> Circuit:
    if args.circuit == "diffusion":
        layout = sponge_layout() if args.kind == "sponge" else blake_layout()
        return build_diffusion(layout.message_qubits, layout.width)
    if args.circuit == "permutation":
        if args.kind != "sponge":
            raise CliError("permutation dump applies to the sponge kind")
        layout = sponge_layout(args.ancillas)
        circ = Circuit(layout.width, layout.register_map())
        build_sponge_permutation(circ, layout, args.rounds)
        return circ
    spec = OracleSpec(target_digest=args.digest, hash_kind=args.kind,
                      iv=args.iv, rounds=args.rounds, rho=args.rho,
                      counter=args.counter, is_last=not args.not_last,
                      ancilla_budget=args.ancillas)
    builder = build_oracle if args.circuit == "oracle" else build_grover_step
    return builder(spec, layout_for(spec))


def cmd_build_circuit(args) -> int:
    circ = _build_named_circuit(args)
    if args.lower:
        layout = layout_for(OracleSpec(target_digest=0, hash_kind=args.kind,
                                       ancilla_budget=args.ancillas))
        circ = lower_circuit(circ, work_qubit=layout.adder_ancillas[0])
        counts = count_resources(circ)
        print("# " + " ".join(f"{k}={v}" for k, v in
                              counts.as_dict().items()), file=sys.stderr)
    text = circ.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _measured_estimate(kind: str, params: estimator.ScalingParams):
    if params.n != 16 or params.s != 4:
        raise CliError("measured counts are available at toy scale "
                       "(n=16, s=4) only")
    spec = OracleSpec(target_digest=0, hash_kind=kind,
                      rho=params.rho or hashes.BLAKE_ROUNDS,
                      ancilla_budget=params.sqrt_s)
    layout = layout_for(spec)
    step = build_grover_step(spec, layout)
    lowered = lower_circuit(step, work_qubit=layout.adder_ancillas[0])
    counts = count_resources(lowered)
    return estimator.Estimate(counts=counts, qubits=layout.width,
                              source="measured", kind=kind, params=params)


def _estimate_rows(estimates):
    rows = []
    for e in estimates:
        c = e.counts
        rows.append((e.kind, e.source, c.toffoli, c.cnot, c.single,
                     c.total, c.depth, e.qubits))
    return rows


ESTIMATE_COLUMNS = ("kind", "source", "toffoli", "cnot", "single", "total",
                    "depth", "qubits")


def cmd_estimate(args) -> int:
    if args.tables:
        rows = []
        for kind, toy, real in (("sponge", estimator.TOY_SPONGE,
                                 estimator.REAL_SPONGE),
                                ("blake", estimator.TOY_BLAKE,
                                 estimator.REAL_BLAKE)):
            formulas = (estimator.sponge_gate_formulas if kind == "sponge"
                        else estimator.blake_gate_formulas)
            for scale, params in (("toy", toy), ("real", real)):
                rows += _estimate_rows([formulas(params)])
                rows += _estimate_rows([estimator.reference_estimate(kind,
                                                                     scale)])
                if scale == "toy":
                    rows += _estimate_rows([_measured_estimate(kind, params)])
        _emit_rows(ESTIMATE_COLUMNS, rows, args.format)
        return EXIT_OK
    params = estimator.ScalingParams(n=args.n, s=args.s, rho=args.rho)
    formulas = (estimator.sponge_gate_formulas if args.kind == "sponge"
                else estimator.blake_gate_formulas)
    estimates = [formulas(params)]
    if args.measured:
        estimates.append(_measured_estimate(args.kind, params))
    _emit_rows(ESTIMATE_COLUMNS, _estimate_rows(estimates), args.format)
    return EXIT_OK


def cmd_grover(args) -> int:
    if args.kind == "blake":
        if not args.reversible_check:
            raise CliError(
                "a statevector search over the compression construction "
                "needs 34 qubits, beyond feasible simulation here; use "
                "--reversible-check to verify its circuit bit-exactly",
                EXIT_INFEASIBLE)
        return _blake_reversible_check(args)
    instance = hashes.sponge_instance(args.digest, args.iv)
    if instance.num_preimages == 0:
        raise CliError(f"digest {args.digest:#04x} has no preimages for "
                       f"iv {args.iv:#06x}", EXIT_NO_PREIMAGE)
    config = GroverRunConfig(instance=instance, steps=args.steps,
                             rng_seed=args.seed)
    if args.unknown_m:
        outcome = run_unknown_m(config)
    elif args.early_stop is not None:
        outcome = run_early_stop(config, args.early_stop)
    else:
        outcome = run_known_m(config)
    print(json.dumps({
        "digest": instance.digest,
        "preimages": sorted(instance.preimages),
        "optimal_steps": optimal_steps(instance.space_size,
                                       instance.num_preimages),
        "measured_message": outcome.measured_message,
        "is_preimage": outcome.is_preimage,
        "oracle_calls": outcome.oracle_calls,
        "samples_used": outcome.samples_used,
    }, indent=2))
    return EXIT_OK


def _blake_reversible_check(args) -> int:
    spec = OracleSpec(target_digest=args.digest, hash_kind="blake",
                      rho=args.rho, counter=args.counter,
                      is_last=not args.not_last, ancilla_budget=1)
    layout = layout_for(spec)
    oracle = build_blake_oracle(spec, layout)
    rng = np.random.default_rng(args.seed)
    messages = rng.integers(0, 1 << 16, size=args.samples, dtype=np.uint64)
    out = reversible_run_bulk(oracle, messages)
    expected = hashes.blake_compress_bulk(messages.astype(np.uint16),
                                          t=args.counter,
                                          is_last=not args.not_last,
                                          rho=args.rho)
    flip = np.uint64(1 << layout.grover_ancilla)
    want_flip = (expected.astype(np.uint64) == args.digest)
    ok_restore = bool(np.all((out & ~flip) == messages))
    ok_flags = bool(np.all(((out & flip) != 0) == want_flip))
    print(json.dumps({
        "digest": args.digest,
        "samples": args.samples,
        "registers_restored": ok_restore,
        "phase_flags_match_reference": ok_flags,
    }, indent=2))
    return EXIT_OK if ok_restore and ok_flags else 1


def cmd_experiments(args) -> int:
    if args.action == "list":
        for name in experiments.EXPERIMENTS:
            print(name)
        return EXIT_OK
    runner = experiments.EXPERIMENTS.get(args.name)
    if runner is None:
        raise CliError(f"unknown experiment {args.name!r}; "
                       "see `experiments list`", EXIT_USAGE)
    overrides = {}
    if args.m is not None:
        key = "m" if args.name in ("probability-evolution", "entropy",
                                   "entropy-scan", "noise") else "ms"
        overrides[key] = args.m if key == "m" else tuple(args.m_list or
                                                         [args.m])
    if args.iv is not None and args.name not in ("entropy", "entropy-scan"):
        overrides["iv"] = args.iv
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.trajectories is not None:
        overrides["trajectories"] = args.trajectories
    if args.probabilities:
        overrides["probabilities"] = tuple(args.probabilities)
    result = runner(args.seed, **overrides)
    path = experiments.write_result(result, _out_dir(args))
    print(f"wrote {path} ({len(result.rows)} rows, "
          f"{result.wall_time:.1f}s)", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser.

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arxgrover",
        description="Grover preimage search on scaled ARX hashes: exact "
                    "simulation, resource estimation, experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common_hash_args(p):
        p.add_argument("--kind", choices=("sponge", "blake"),
                       default="sponge")
        p.add_argument("--iv", type=_int, default=0,
                       help="16-bit initial sponge state (default 0)")
        p.add_argument("--rounds", type=int, default=hashes.SPONGE_ROUNDS,
                       help="sponge permutation rounds (default 10)")
        p.add_argument("--rho", type=int, default=hashes.BLAKE_ROUNDS,
                       help="compression rounds (default 12)")
        p.add_argument("--counter", type=_int, default=0,
                       help="compression block counter t (default 0)")
        p.add_argument("--not-last", action="store_true",
                       help="treat the compression block as non-final")

    p = sub.add_parser("hash", help="digest one message")
    common_hash_args(p)
    p.add_argument("--message", type=_int, required=True)
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("preimages",
                       help="digest tables and preimage histograms as CSV")
    common_hash_args(p)
    p.add_argument("--digest", type=_int, default=None,
                   help="restrict to one digest")
    p.add_argument("--table", action="store_true",
                   help="emit the full message->digest table")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_preimages)

    p = sub.add_parser("build-circuit",
                       help="serialize a named circuit as text")
    common_hash_args(p)
    p.add_argument("--circuit", choices=("permutation", "oracle", "step",
                                         "diffusion"), default="step")
    p.add_argument("--digest", type=_int, default=0)
    p.add_argument("--ancillas", type=int, default=2,
                   help="adder ancilla budget (1=serial)")
    p.add_argument("--lower", action="store_true",
                   help="decompose to elementary gates and report counts")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_build_circuit)

    p = sub.add_parser("estimate", help="closed-form resource scaling")
    p.add_argument("--kind", choices=("sponge", "blake"), default="sponge")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--s", type=int, default=4)
    p.add_argument("--rho", type=int, default=None)
    p.add_argument("--measured", action="store_true",
                   help="add counts measured from the built toy circuit")
    p.add_argument("--tables", action="store_true",
                   help="emit the full toy/real comparison tables")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("grover", help="run a preimage search")
    common_hash_args(p)
    p.add_argument("--digest", type=_int, required=True)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--unknown-m", action="store_true",
                   help="search without assuming the preimage count")
    p.add_argument("--early-stop", type=int, default=None, metavar="STEPS",
                   help="stop early and resample")
    p.add_argument("--seed", type=_int, default=0)
    p.add_argument("--reversible-check", action="store_true",
                   help="bit-level verification for the wide compression "
                        "circuit instead of a statevector run")
    p.add_argument("--samples", type=int, default=200,
                   help="messages for --reversible-check")
    p.set_defaults(func=cmd_grover)

    p = sub.add_parser("experiments", help="run the experiment suite")
    p.add_argument("action", choices=("run", "list"))
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--seed", type=_int, default=0)
    p.add_argument("--out", default=None,
                   help="output directory (default $ARXGROVER_OUT or .)")
    p.add_argument("--m", type=int, default=None,
                   help="preimage count for single-instance experiments")
    p.add_argument("--m-list", type=int, nargs="*", default=None)
    p.add_argument("--iv", type=_int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--trajectories", type=int, default=None)
    p.add_argument("--probabilities", type=float, nargs="*", default=None)
    p.set_defaults(func=cmd_experiments)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiments" and args.action == "run" \
            and not args.name:
        parser.error("experiments run requires a name")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMETER


if __name__ == "__main__":
    sys.exit(main())
