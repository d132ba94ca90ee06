"""Closed-form gate and width scaling for both constructions.

The per-step costs of the sponge and compression searches are affine in
the state width n for fixed site count s (and round count rho), which is
what lets desk-scale circuits price out full-size attacks. Formulas are
evaluated in exact rational arithmetic; measured counts from built
circuits reconcile against them within a stated tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .circuit import ResourceCount


@dataclass(frozen=True)
class ScalingParams:
    """State bits n, permutation-matrix sites s, rounds rho (compression)."""

    n: int
    s: int
    rho: int | None = None

    def __post_init__(self):
        root = math.isqrt(self.s)
        if root * root != self.s:
            raise ValueError("site count must be a perfect square")
        if self.n % self.s != 0:
            raise ValueError("state bits must divide evenly across sites")
        if self.rho is not None and self.rho < 1:
            raise ValueError("rho must be >= 1")

    @property
    def sqrt_s(self) -> int:
        return math.isqrt(self.s)


@dataclass(frozen=True)
class Estimate:
    counts: ResourceCount
    qubits: int
    source: str  # "formula" | "measured" | "reference"
    kind: str = "sponge"
    params: ScalingParams | None = None


def _exact(value: Fraction, label: str) -> int:
    if value.denominator != 1:
        raise ValueError(f"{label} does not evaluate to an integer")
    return int(value)


def sponge_gate_formulas(p: ScalingParams) -> Estimate:
    """Per-step gate scaling of the sponge search.

    Toffoli 88n - 80s - 88; CNOT 240n - 160s; single 84n - 160s + 2;
    depth (120/sqrt(s) + 8)n - 120 sqrt(s) - 80.
    """
    n, s = Fraction(p.n), Fraction(p.s)
    rs = Fraction(p.sqrt_s)
    counts = ResourceCount(
        toffoli=_exact(88 * n - 80 * s - 88, "toffoli"),
        cnot=_exact(240 * n - 160 * s, "cnot"),
        single=_exact(84 * n - 160 * s + 2, "single"),
        depth=_exact((120 / rs + 8) * n - 120 * rs - 80, "depth"),
        width=qubit_width(p, "sponge", parallel_adders=True),
    )
    return Estimate(counts=counts, qubits=counts.width, source="formula",
                    kind="sponge", params=p)


def blake_gate_formulas(p: ScalingParams) -> Estimate:
    """Per-step gate scaling of the compression-function search.

    Toffoli (8r + 16r/sqrt(s) + 12)n - (8s + 16 sqrt(s))r - 56;
    CNOT (24r + 40r/sqrt(s) + 1)n - (16s + 32 sqrt(s))r;
    single (8r + 16r/sqrt(s) + 7)n - (16s + 32 sqrt(s))r + 2;
    depth (12r/sqrt(s) + 16r/s + 16)n - (12 sqrt(s) + 24)r - 50.
    """
    if p.rho is None:
        raise ValueError("compression scaling needs a round count")
    n, s, r = Fraction(p.n), Fraction(p.s), Fraction(p.rho)
    rs = Fraction(p.sqrt_s)
    counts = ResourceCount(
        toffoli=_exact((8 * r + 16 * r / rs + 12) * n
                       - (8 * s + 16 * rs) * r - 56, "toffoli"),
        cnot=_exact((24 * r + 40 * r / rs + 1) * n
                    - (16 * s + 32 * rs) * r, "cnot"),
        single=_exact((8 * r + 16 * r / rs + 7) * n
                      - (16 * s + 32 * rs) * r + 2, "single"),
        depth=_exact((12 * r / rs + 16 * r / s + 16) * n
                     - (12 * rs + 24) * r - 50, "depth"),
        width=qubit_width(p, "blake", parallel_adders=True),
    )
    return Estimate(counts=counts, qubits=counts.width, source="formula",
                    kind="blake", params=p)


def qubit_width(p: ScalingParams, kind: str, parallel_adders: bool) -> int:
    """Total register width including ancillas.

    The sponge search holds the whole state plus adder ancillas (sqrt(s)
    when adders run in parallel, one otherwise) plus the search ancilla.
    The compression search doubles the data width because the message
    lives in its own register beside the working vector.
    """
    ancillas = p.sqrt_s if parallel_adders else 1
    if kind == "sponge":
        return p.n + ancillas + 1
    if kind == "blake":
        return 2 * p.n + ancillas + 1
    raise ValueError("kind must be 'sponge' or 'blake'")


TOY_SPONGE = ScalingParams(n=16, s=4)
REAL_SPONGE = ScalingParams(n=512, s=16)
TOY_BLAKE = ScalingParams(n=16, s=4, rho=12)
REAL_BLAKE = ScalingParams(n=1024, s=16, rho=12)

# Previously reported per-step costs for the same constructions, kept for
# cross-checking. Two cells disagree with the formulas they accompany:
# the toy compression Toffoli count (2240 listed, but only 2440 is
# consistent with the row's own total of 11018) and both sponge depth
# values (1248/19856 listed vs 768/18896 by the depth formula). The
# discrepant values are retained verbatim and flagged, not reconciled.
REFERENCE_TABLES = {
    "sponge": {
        "toy": {"toffoli": 1000, "cnot": 3200, "single": 706,
                "total": 4906, "depth": 1248, "qubits": 19},
        "real": {"toffoli": 43688, "cnot": 120320, "single": 40450,
                 "total": 204458, "depth": 19856, "qubits": 517},
    },
    "blake": {
        "toy": {"toffoli": 2240, "cnot": 6928, "single": 1650,
                "total": 11018, "depth": 1550, "qubits": 35},
        "real": {"toffoli": 157384, "cnot": 414208, "single": 150018,
                 "total": 721610, "depth": 64622, "qubits": 2053},
    },
}

REFERENCE_DISCREPANCIES = {
    ("blake", "toy", "toffoli"): 2440,   # row total implies this value
    ("sponge", "toy", "depth"): 768,     # depth formula at (16, 4)
    ("sponge", "real", "depth"): 18896,  # depth formula at (512, 16)
}


def reference_estimate(kind: str, scale: str) -> Estimate:
    row = REFERENCE_TABLES[kind][scale]
    counts = ResourceCount(toffoli=row["toffoli"], cnot=row["cnot"],
                           single=row["single"], depth=row["depth"],
                           width=row["qubits"])
    return Estimate(counts=counts, qubits=row["qubits"], source="reference",
                    kind=kind)


@dataclass(frozen=True)
class GateClassDelta:
    gate_class: str
    measured: int
    formula: int
    relative: float
    within: bool


@dataclass(frozen=True)
class ReconcileReport:
    deltas: tuple[GateClassDelta, ...]
    depth_measured: int
    depth_formula: int
    tolerance: float

    @property
    def ok(self) -> bool:
        return all(d.within for d in self.deltas)

    def lines(self) -> list[str]:
        out = []
        for d in self.deltas:
            mark = "ok" if d.within else "OUT"
            out.append(f"{d.gate_class}: measured={d.measured} "
                       f"formula={d.formula} delta={d.relative:+.4f} [{mark}]")
        out.append(f"depth: measured={self.depth_measured} "
                   f"formula={self.depth_formula} (informational)")
        return out


def reconcile(measured: Estimate, formula: Estimate,
              tolerance: float = 0.10) -> ReconcileReport:
    """Relative per-gate-class deltas between a built circuit and the
    closed forms. Depth is reported but never gated: the published depth
    values are internally inconsistent, so no tolerance is meaningful.
    """
    deltas = []
    for name in ("toffoli", "cnot", "single"):
        got = getattr(measured.counts, name)
        want = getattr(formula.counts, name)
        rel = (got - want) / want if want else 0.0
        deltas.append(GateClassDelta(gate_class=name, measured=got,
                                     formula=want, relative=rel,
                                     within=abs(rel) <= tolerance))
    return ReconcileReport(deltas=tuple(deltas),
                           depth_measured=measured.counts.depth,
                           depth_formula=formula.counts.depth,
                           tolerance=tolerance)
