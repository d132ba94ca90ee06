"""Circuit intermediate representation and reversible-logic toolkit.

Circuits are ordered lists of self-inverse gate records (X, H, Z, CNOT,
Toffoli, multi-controlled X) over named registers. Word rotations are free:
they relabel the register map instead of emitting gates. Gates may carry a
classical condition; instantiation resolves those against the circuit's
classical registers before counting or execution.

The module also provides the building blocks shared by both hash oracles:
bitwise XOR between registers, an in-place adder mod 2^n with a single
ancilla, and the decomposition of multi-controlled NOTs into Toffolis with
one borrowed work qubit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

X, H, Z, CNOT, TOFFOLI, MCX = "x", "h", "z", "cnot", "toffoli", "mcx"

_CONTROL_COUNTS = {X: 0, H: 0, Z: 0, CNOT: 1, TOFFOLI: 2}
CLASSICAL_KINDS = frozenset({X, CNOT, TOFFOLI, MCX})


@dataclass(frozen=True)
class Gate:
    """One self-inverse gate: kind, polarity-tagged controls, target.

    ``control_states[i]`` is the value control ``controls[i]`` must hold
    (1 = solid control, 0 = hollow). ``condition`` names a classical bit
    that must be 1 for the gate to survive instantiation.
    """

    kind: str
    target: int
    controls: tuple[int, ...] = ()
    control_states: tuple[int, ...] = ()
    condition: tuple[str, int] | None = None

    def __post_init__(self):
        if self.kind not in (X, H, Z, CNOT, TOFFOLI, MCX):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        expected = _CONTROL_COUNTS.get(self.kind)
        if expected is not None and len(self.controls) != expected:
            raise ValueError(
                f"{self.kind} takes {expected} controls, got {len(self.controls)}")
        if self.kind == MCX and len(self.controls) < 3:
            raise ValueError("mcx needs >= 3 controls; use cnot or toffoli")
        if not self.control_states:
            object.__setattr__(self, "control_states", (1,) * len(self.controls))
        if len(self.control_states) != len(self.controls):
            raise ValueError("one control state per control")
        qubits = (*self.controls, self.target)
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate qubit in gate {self}")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (*self.controls, self.target)

    @property
    def is_classical(self) -> bool:
        return self.kind in CLASSICAL_KINDS


def gate_x(target, condition=None):
    return Gate(X, target, condition=condition)


def gate_h(target):
    return Gate(H, target)


def gate_z(target):
    return Gate(Z, target)


def gate_cnot(control, target):
    return Gate(CNOT, target, (control,))


def gate_toffoli(c1, c2, target):
    return Gate(TOFFOLI, target, (c1, c2))


def gate_mcx(controls, target, control_states=None):
    controls = tuple(controls)
    states = tuple(control_states) if control_states is not None else (1,) * len(controls)
    if len(controls) == 1:
        gate = Gate(CNOT, target, controls, states)
    elif len(controls) == 2:
        gate = Gate(TOFFOLI, target, controls, states)
    else:
        gate = Gate(MCX, target, controls, states)
    return gate


@dataclass(frozen=True)
class RegisterMap:
    """Bijection from (register name, bit position) to physical qubits."""

    labels: dict[str, tuple[int, ...]]

    def __post_init__(self):
        seen: set[int] = set()
        for name, qubits in self.labels.items():
            for q in qubits:
                if q in seen:
                    raise ValueError(f"qubit {q} mapped twice (register {name!r})")
                seen.add(q)

    def qubits(self, register: str) -> tuple[int, ...]:
        try:
            return self.labels[register]
        except KeyError:
            raise KeyError(f"unknown register {register!r}") from None

    def qubit(self, register: str, bit: int) -> int:
        return self.qubits(register)[bit]

    def width(self, register: str) -> int:
        return len(self.qubits(register))


def rotate_register(reg_map: RegisterMap, register: str, amount: int,
                    direction: str = "left") -> RegisterMap:
    """Relabel a register to realise a cyclic rotation. Emits zero gates.

    After a left rotation by r, the wire that carried bit j carries bit
    (j + r) mod n, so register values read as value <<< r.
    """
    old = reg_map.qubits(register)
    n = len(old)
    if direction not in ("left", "right"):
        raise ValueError("direction must be 'left' or 'right'")
    r = amount % n
    if direction == "right":
        r = (n - r) % n
    rotated = tuple(old[(j - r) % n] for j in range(n))
    labels = dict(reg_map.labels)
    labels[register] = rotated
    return RegisterMap(labels)


@dataclass
class ResourceCount:
    """Gate tallies per class plus ASAP depth and width."""

    toffoli: int = 0
    cnot: int = 0
    single: int = 0
    depth: int = 0
    width: int = 0

    @property
    def total(self) -> int:
        return self.toffoli + self.cnot + self.single

    def as_dict(self) -> dict[str, int]:
        return {"toffoli": self.toffoli, "cnot": self.cnot,
                "single": self.single, "total": self.total,
                "depth": self.depth, "width": self.width}


class Circuit:
    """Ordered gate list over ``width`` qubits plus register bookkeeping.

    All gate kinds here are self-inverse, so the formal inverse is the
    gate list reversed. ``markers`` name positions in the gate stream for
    mid-circuit probes.
    """

    def __init__(self, width: int, register_map: RegisterMap | None = None,
                 classical: dict[str, tuple[int, int]] | None = None):
        if width < 1:
            raise ValueError("width must be >= 1")
        self.width = width
        self.register_map = register_map or RegisterMap({})
        # classical registers: name -> (bit width, value)
        self.classical = dict(classical or {})
        self.gates: list[Gate] = []
        self.markers: dict[str, int] = {}

    # -- construction -----------------------------------------------------

    def append(self, gate: Gate) -> None:
        for q in gate.qubits:
            if not 0 <= q < self.width:
                raise ValueError(f"qubit {q} out of range for width {self.width}")
        self.gates.append(gate)

    def extend(self, gates) -> None:
        for g in gates:
            self.append(g)

    def mark(self, name: str) -> None:
        self.markers[name] = len(self.gates)

    def rotate(self, register: str, amount: int, direction: str = "left") -> None:
        self.register_map = rotate_register(self.register_map, register,
                                            amount, direction)

    def qubits_of(self, register) -> tuple[int, ...]:
        if isinstance(register, str):
            return self.register_map.qubits(register)
        return tuple(register)

    def classical_bit(self, name: str, bit: int) -> int:
        width, value = self.classical[name]
        if not 0 <= bit < width:
            raise ValueError(f"bit {bit} out of range for classical {name!r}")
        return (value >> bit) & 1

    # -- derived circuits --------------------------------------------------

    def copy_empty(self) -> "Circuit":
        out = Circuit(self.width, self.register_map, self.classical)
        return out

    def inverse(self) -> "Circuit":
        out = self.copy_empty()
        out.gates = list(reversed(self.gates))
        n = len(self.gates)
        out.markers = {name: n - idx for name, idx in self.markers.items()}
        return out

    def instantiate(self) -> "Circuit":
        """Resolve classical conditions: drop false-conditioned gates."""
        out = self.copy_empty()
        out.markers = dict(self.markers)
        kept = []
        dropped_before: list[int] = []
        dropped = 0
        for idx, g in enumerate(self.gates):
            dropped_before.append(dropped)
            if g.condition is not None:
                name, bit = g.condition
                if name not in self.classical:
                    raise ValueError(f"gate conditioned on unknown classical {name!r}")
                if not self.classical_bit(name, bit):
                    dropped += 1
                    continue
                g = replace(g, condition=None)
            kept.append(g)
        dropped_before.append(dropped)
        out.gates = kept
        out.markers = {name: idx - dropped_before[min(idx, len(self.gates))]
                       for name, idx in self.markers.items()}
        return out

    def has_conditions(self) -> bool:
        return any(g.condition is not None for g in self.gates)

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        lines = [f"width {self.width}"]
        for name, qubits in self.register_map.labels.items():
            lines.append("reg " + name + " " + " ".join(str(q) for q in qubits))
        for name, (bits, value) in self.classical.items():
            lines.append(f"creg {name} {bits} {value:#x}")
        marks = {idx: [] for idx in self.markers.values()}
        for name, idx in self.markers.items():
            marks[idx].append(name)
        for idx, g in enumerate(self.gates):
            for name in marks.get(idx, ()):
                lines.append(f"mark {name}")
            parts = ["gate", g.kind]
            parts += [("+" if s else "-") + str(q)
                      for q, s in zip(g.controls, g.control_states)]
            parts.append(str(g.target))
            if g.condition is not None:
                parts.append(f"if {g.condition[0]}[{g.condition[1]}]")
            lines.append(" ".join(parts))
        for name in marks.get(len(self.gates), ()):
            lines.append(f"mark {name}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        width = None
        registers: dict[str, tuple[int, ...]] = {}
        classical: dict[str, tuple[int, int]] = {}
        gates: list[Gate] = []
        markers: dict[str, int] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "width":
                width = int(parts[1])
            elif parts[0] == "reg":
                registers[parts[1]] = tuple(int(p) for p in parts[2:])
            elif parts[0] == "creg":
                classical[parts[1]] = (int(parts[2]), int(parts[3], 0))
            elif parts[0] == "mark":
                markers[parts[1]] = len(gates)
            elif parts[0] == "gate":
                kind = parts[1]
                condition = None
                body = parts[2:]
                if len(body) >= 2 and body[-2] == "if":
                    name, _, bit = body[-1].partition("[")
                    condition = (name, int(bit.rstrip("]")))
                    body = body[:-2]
                controls, states = [], []
                for tok in body[:-1]:
                    states.append(0 if tok[0] == "-" else 1)
                    controls.append(int(tok.lstrip("+-")))
                gates.append(Gate(kind, int(body[-1]), tuple(controls),
                                  tuple(states), condition))
            else:
                raise ValueError(f"unparseable line: {raw!r}")
        if width is None:
            raise ValueError("missing width header")
        circ = cls(width, RegisterMap(registers), classical)
        for g in gates:
            circ.append(g)
        circ.markers = markers
        return circ


# ---------------------------------------------------------------------------
# Register-level operations.

def xor_into(circuit: Circuit, source, dest) -> Circuit:
    """Append CNOTs realising dest ^= source between equal-width registers."""
    src = circuit.qubits_of(source)
    dst = circuit.qubits_of(dest)
    if len(src) != len(dst):
        raise ValueError("xor_into requires equal register widths")
    if set(src) & set(dst):
        raise ValueError("xor_into registers overlap")
    for s, d in zip(src, dst):
        circuit.append(gate_cnot(s, d))
    return circuit


def add_mod2n(circuit: Circuit, a, b, ancilla: int) -> Circuit:
    """Append a ripple-carry adder computing a <- (a + b) mod 2^n.

    Register b and the ancilla are restored; the ancilla must enter in |0>
    (it seeds the carry chain). Carries ripple along the b wires via
    majority blocks and are unwound by un-majority blocks; interior
    un-majority blocks use the NOT-assisted variant, which shortens the
    critical carry path at the cost of two X gates each.
    """
    dst = circuit.qubits_of(a)   # receives the sum
    src = circuit.qubits_of(b)   # unchanged; carries ride on these wires
    n = len(dst)
    if len(src) != n:
        raise ValueError("add_mod2n requires equal register widths")
    overlap = set(dst) & set(src)
    if overlap or ancilla in set(dst) | set(src):
        raise ValueError("add_mod2n registers and ancilla must be disjoint")
    if n == 1:
        circuit.append(gate_cnot(src[0], dst[0]))
        return circuit

    def carry_wire(i):
        return ancilla if i == 0 else src[i - 1]

    for i in range(n - 1):
        c = carry_wire(i)
        circuit.append(gate_cnot(src[i], dst[i]))
        circuit.append(gate_cnot(src[i], c))
        circuit.append(gate_toffoli(c, dst[i], src[i]))
    # top bit needs only the sum, not a rippled carry
    circuit.append(gate_cnot(src[n - 1], dst[n - 1]))
    circuit.append(gate_cnot(carry_wire(n - 1), dst[n - 1]))
    for i in range(n - 2, -1, -1):
        c = carry_wire(i)
        if i == 0:
            circuit.append(gate_toffoli(c, dst[i], src[i]))
            circuit.append(gate_cnot(src[i], c))
            circuit.append(gate_cnot(c, dst[i]))
        else:
            circuit.append(gate_x(dst[i]))
            circuit.append(gate_cnot(c, dst[i]))
            circuit.append(gate_toffoli(c, dst[i], src[i]))
            circuit.append(gate_x(dst[i]))
            circuit.append(gate_cnot(src[i], c))
            circuit.append(gate_cnot(src[i], dst[i]))
    return circuit


# ---------------------------------------------------------------------------
# Multi-controlled X decomposition with borrowed qubits.

def _ladder(controls, target, dirty):
    """m-controlled X as 4(m-2) Toffolis using m-2 borrowed qubits.

    The borrowed qubits may hold anything; the double down/up sweep both
    applies the flip and undoes every borrowed-qubit side effect.
    """
    m = len(controls)
    if m == 1:
        return [gate_cnot(controls[0], target)]
    if m == 2:
        return [gate_toffoli(controls[0], controls[1], target)]
    if len(dirty) < m - 2:
        raise ValueError(f"need {m - 2} borrowed qubits, have {len(dirty)}")
    dirty = list(dirty[:m - 2])

    def chain(j):
        if j == m - 1:
            return gate_toffoli(controls[j], dirty[j - 2], target)
        if j == 1:
            return gate_toffoli(controls[0], controls[1], dirty[0])
        return gate_toffoli(controls[j], dirty[j - 2], dirty[j - 1])

    seq = [chain(j) for j in range(m - 1, 0, -1)]
    seq += [chain(j) for j in range(2, m)]
    seq += [chain(j) for j in range(m - 2, 0, -1)]
    seq += [chain(j) for j in range(2, m - 1)]
    return seq


def decompose_multi_cx(gate: Gate, work_qubit: int) -> list[Gate]:
    """Lower a multi-controlled X to Toffolis with one borrowed work qubit.

    The work qubit may hold any value and is always restored. Gates with
    one or two controls pass through unchanged. All controls must be
    positive; polarity is handled by the lowering pass.
    """
    if any(s != 1 for s in gate.control_states):
        raise ValueError("decompose_multi_cx expects positive controls")
    k = len(gate.controls)
    if k <= 2:
        return [gate]
    if work_qubit in gate.qubits:
        raise ValueError("work qubit collides with gate qubits")
    controls = list(gate.controls)
    target = gate.target
    if k == 3:
        return _ladder(controls, target, [work_qubit])
    # Split into two halves toggled twice; each half borrows the other's
    # qubits, so a single extra work qubit suffices for any k.
    m1 = (k + 1) // 2
    first, second = controls[:m1], controls[m1:]
    seq = []
    for _ in range(2):
        seq += _ladder(first, work_qubit, second + [target])
        seq += _ladder(second + [work_qubit], target, first)
    return seq


def lower_circuit(circuit: Circuit, work_qubit: int | None = None) -> Circuit:
    """Instantiate and lower to elementary gates (X, H, Z, CNOT, Toffoli).

    Negative controls become X conjugation; multi-controlled X gates are
    decomposed through ``work_qubit``.
    """
    resolved = circuit.instantiate()
    out = resolved.copy_empty()
    remap: list[int] = []
    for g in resolved.gates:
        remap.append(len(out.gates))
        flips = [q for q, s in zip(g.controls, g.control_states) if s == 0]
        core = replace(g, control_states=(1,) * len(g.controls)) if flips else g
        for q in flips:
            out.append(gate_x(q))
        if core.kind == MCX:
            if work_qubit is None:
                raise ValueError("lowering mcx gates requires a work qubit")
            out.extend(decompose_multi_cx(core, work_qubit))
        else:
            out.append(core)
        for q in flips:
            out.append(gate_x(q))
    remap.append(len(out.gates))
    out.markers = {name: remap[min(idx, len(remap) - 1)]
                   for name, idx in resolved.markers.items()}
    return out


# ---------------------------------------------------------------------------
# Resource counting.

def count_resources(circuit: Circuit) -> ResourceCount:
    """Tally gate classes and ASAP depth of a fully lowered circuit.

    Depth layers gates as soon as every qubit they touch is free, so gates
    on disjoint qubit sets share a layer.
    """
    if circuit.has_conditions():
        raise ValueError("instantiate the circuit before counting")
    counts = ResourceCount(width=circuit.width)
    layer = [0] * circuit.width
    for g in circuit.gates:
        if g.kind == MCX:
            raise ValueError("decompose mcx gates before counting")
        if g.kind == TOFFOLI:
            counts.toffoli += 1
        elif g.kind == CNOT:
            counts.cnot += 1
        else:
            counts.single += 1
        depth_here = 1 + max(layer[q] for q in g.qubits)
        for q in g.qubits:
            layer[q] = depth_here
    counts.depth = max(layer) if layer else 0
    return counts


# ---------------------------------------------------------------------------
# Bit-exact reversible execution (classical gates only).

def _check_reversible(circuit: Circuit) -> None:
    for g in circuit.gates:
        if not g.is_classical:
            raise ValueError(
                f"{g.kind} gate is not classical-reversible; "
                "reversible execution handles X/CNOT/Toffoli/mcx only")


def reversible_run(circuit: Circuit, basis_state: int) -> int:
    """Propagate one basis state through a classical-reversible circuit."""
    if not 0 <= basis_state < (1 << circuit.width):
        raise ValueError("basis state out of range")
    return int(reversible_run_bulk(circuit, np.array([basis_state],
                                                     dtype=np.uint64))[0])


def reversible_run_bulk(circuit: Circuit, basis_states: np.ndarray) -> np.ndarray:
    """Vectorised basis-state propagation; cost is linear in gate count.

    Width may exceed what a statevector can hold (up to 64 qubits), which
    is how the wide compression circuits get verified.
    """
    if circuit.width > 64:
        raise ValueError("reversible execution supports at most 64 qubits")
    resolved = circuit.instantiate() if circuit.has_conditions() else circuit
    _check_reversible(resolved)
    state = np.array(basis_states, dtype=np.uint64, copy=True)
    one = np.uint64(1)
    for g in resolved.gates:
        tbit = np.uint64(1) << np.uint64(g.target)
        if not g.controls:
            state ^= tbit
            continue
        satisfied = np.ones(state.shape, dtype=bool)
        for q, s in zip(g.controls, g.control_states):
            bit = (state >> np.uint64(q)) & one
            satisfied &= (bit == s)
        state[satisfied] ^= tbit
    return state
