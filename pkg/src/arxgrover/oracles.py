"""Grover oracle and diffusion builders for both toy hashes.

A sponge oracle XORs the classical pre-absorption state onto the register,
runs the quantum permutation, flips the search ancilla through a digest-
matching multi-controlled NOT, and uncomputes. The BLAKE-style oracle does
the same around its compression circuit, keeping the message in its own
register because the rounds keep reading it.

Zero digest bits become hollow (control-on-0) controls; lowering turns
those into X conjugation. The search ancilla is prepared in |-> so the
digest check kicks back a phase flip.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import hashes
from .circuit import (Circuit, RegisterMap, add_mod2n, gate_h, gate_mcx,
                      gate_x, xor_into)

MIDPOINT_MARKER = "midpoint"


@dataclass(frozen=True)
class OracleSpec:
    """What to search for and how the arithmetic is laid out."""

    target_digest: int
    hash_kind: str = "sponge"
    iv: int = 0
    rounds: int = hashes.SPONGE_ROUNDS
    rho: int = hashes.BLAKE_ROUNDS
    counter: int = 0
    is_last: bool = True
    ancilla_budget: int = 2

    def __post_init__(self):
        if self.hash_kind not in ("sponge", "blake"):
            raise ValueError("hash_kind must be 'sponge' or 'blake'")
        if not 0 <= self.target_digest < 256:
            raise ValueError("digest must fit in 8 bits")
        if self.ancilla_budget < 1:
            raise ValueError("need at least one adder ancilla")


@dataclass(frozen=True)
class GroverLayout:
    """Physical qubit assignment for one search circuit."""

    word_registers: dict[str, tuple[int, ...]]
    message_qubits: tuple[int, ...]
    digest_qubits: tuple[int, ...]
    adder_ancillas: tuple[int, ...]
    grover_ancilla: int
    width: int

    def register_map(self) -> RegisterMap:
        labels = dict(self.word_registers)
        labels["anc"] = self.adder_ancillas
        labels["grover"] = (self.grover_ancilla,)
        return RegisterMap(labels)


def sponge_layout(ancilla_budget: int = 2) -> GroverLayout:
    """16 state qubits (rate = message in the low byte), adder ancillas,
    one search ancilla. The default two ancillas let the two quarter
    rounds of each half-round run concurrently.
    """
    words = {f"v{i}": tuple(range(4 * i, 4 * i + 4)) for i in range(4)}
    ancillas = tuple(range(16, 16 + ancilla_budget))
    return GroverLayout(
        word_registers=words,
        message_qubits=tuple(range(8)),
        digest_qubits=tuple(range(8)),
        adder_ancillas=ancillas,
        grover_ancilla=16 + ancilla_budget,
        width=17 + ancilla_budget,
    )


def blake_layout(ancilla_budget: int = 1) -> GroverLayout:
    """Message block d and working vector v in separate registers: the
    rounds keep reading the message, so it cannot share wires with v.
    """
    words = {f"d{i}": tuple(range(4 * i, 4 * i + 4)) for i in range(4)}
    for i in range(4):
        words[f"v{i}"] = tuple(range(16 + 4 * i, 20 + 4 * i))
    ancillas = tuple(range(32, 32 + ancilla_budget))
    return GroverLayout(
        word_registers=words,
        message_qubits=tuple(range(16)),
        digest_qubits=tuple(range(16, 24)),
        adder_ancillas=ancillas,
        grover_ancilla=32 + ancilla_budget,
        width=33 + ancilla_budget,
    )


def layout_for(spec: OracleSpec) -> GroverLayout:
    if spec.hash_kind == "sponge":
        return sponge_layout(spec.ancilla_budget)
    return blake_layout(spec.ancilla_budget)


# ---------------------------------------------------------------------------
# Quantum quarter rounds.

def quantum_qr(circuit: Circuit, a: str, b: str, ancilla: int) -> None:
    """Sponge quarter round between word registers a and b.

    Rotations relabel the b register and emit nothing.
    """
    add_mod2n(circuit, a, b, ancilla)
    xor_into(circuit, a, b)
    circuit.rotate(b, 2, "left")
    add_mod2n(circuit, a, b, ancilla)
    xor_into(circuit, a, b)
    circuit.rotate(b, 1, "left")


def quantum_g(circuit: Circuit, a: str, b: str, x: str, y: str,
              ancilla: int) -> None:
    """BLAKE-style mixing function; x and y are message words."""
    add_mod2n(circuit, a, b, ancilla)
    add_mod2n(circuit, a, x, ancilla)
    xor_into(circuit, a, b)
    circuit.rotate(b, 2, "right")
    add_mod2n(circuit, a, b, ancilla)
    add_mod2n(circuit, a, y, ancilla)
    xor_into(circuit, a, b)
    circuit.rotate(b, 1, "right")


def _ancilla(layout: GroverLayout, slot: int) -> int:
    return layout.adder_ancillas[slot % len(layout.adder_ancillas)]


def build_sponge_permutation(circuit: Circuit, layout: GroverLayout,
                             rounds: int) -> None:
    """Column then diagonal quarter rounds, iterated.

    The two quarter rounds of each half-round get distinct ancillas when
    the layout provides them, which lets them schedule in parallel.
    """
    for _ in range(rounds):
        quantum_qr(circuit, "v0", "v2", _ancilla(layout, 0))
        quantum_qr(circuit, "v1", "v3", _ancilla(layout, 1))
        quantum_qr(circuit, "v0", "v3", _ancilla(layout, 0))
        quantum_qr(circuit, "v1", "v2", _ancilla(layout, 1))


def build_blake_rounds(circuit: Circuit, layout: GroverLayout,
                       rho: int) -> None:
    """Compression rounds; the message-word schedule is pure register
    selection, so it costs nothing."""
    for r in range(rho):
        s = hashes.BLAKE_SCHEDULE[r % len(hashes.BLAKE_SCHEDULE)]
        d = [f"d{i}" for i in s]
        quantum_g(circuit, "v0", "v2", d[0], d[1], _ancilla(layout, 0))
        quantum_g(circuit, "v1", "v3", d[2], d[3], _ancilla(layout, 1))
        quantum_g(circuit, "v0", "v3", d[0], d[1], _ancilla(layout, 0))
        quantum_g(circuit, "v1", "v2", d[2], d[3], _ancilla(layout, 1))


# ---------------------------------------------------------------------------
# Oracles.

def _digest_check(circuit: Circuit, layout: GroverLayout, digest: int) -> None:
    states = tuple((digest >> i) & 1 for i in range(len(layout.digest_qubits)))
    circuit.append(gate_mcx(layout.digest_qubits, layout.grover_ancilla,
                            control_states=states))
    circuit.mark(MIDPOINT_MARKER)


def _conditioned_x_layer(circuit: Circuit, qubits, register_name: str) -> None:
    for bit, q in enumerate(qubits):
        circuit.append(gate_x(q, condition=(register_name, bit)))


def build_sponge_oracle(spec: OracleSpec,
                        layout: GroverLayout | None = None) -> Circuit:
    """Phase oracle for the sponge hash.

    Acting on |m> (rate), |0> (capacity) and |-> (ancilla), it flips the
    sign of exactly the preimages of the target digest and restores every
    work register. The classical initial state enters as an X layer
    conditioned on the bits of the stored constant, applied again at the
    end to undo the absorption offset.
    """
    layout = layout or layout_for(spec)
    state_qubits = tuple(q for i in range(4)
                         for q in layout.word_registers[f"v{i}"])
    forward = Circuit(layout.width, layout.register_map(),
                      classical={"iv": (16, spec.iv)})
    build_sponge_permutation(forward, layout, spec.rounds)

    circ = Circuit(layout.width, layout.register_map(),
                   classical={"iv": (16, spec.iv)})
    _conditioned_x_layer(circ, state_qubits, "iv")
    circ.extend(forward.gates)
    _digest_check(circ, layout, spec.target_digest)
    circ.extend(reversed(forward.gates))
    _conditioned_x_layer(circ, state_qubits, "iv")
    return circ


def build_blake_oracle(spec: OracleSpec,
                       layout: GroverLayout | None = None) -> Circuit:
    """Phase oracle for the BLAKE-style compression.

    The working vector's classical initialisation is stored in a classical
    register and applied as conditioned X gates; rounds then mix scheduled
    message words into the vector, the digest check targets the ancilla
    from v0 and v1, and the whole compute half runs in reverse.
    """
    layout = layout or layout_for(spec)
    init = hashes.pack_words(hashes.blake_initial_vector(spec.counter,
                                                         spec.is_last))
    v_qubits = tuple(q for i in range(4) for q in layout.word_registers[f"v{i}"])
    forward = Circuit(layout.width, layout.register_map(),
                      classical={"vinit": (16, init)})
    build_blake_rounds(forward, layout, spec.rho)

    circ = Circuit(layout.width, layout.register_map(),
                   classical={"vinit": (16, init)})
    _conditioned_x_layer(circ, v_qubits, "vinit")
    circ.extend(forward.gates)
    _digest_check(circ, layout, spec.target_digest)
    circ.extend(reversed(forward.gates))
    _conditioned_x_layer(circ, v_qubits, "vinit")
    return circ


def build_oracle(spec: OracleSpec,
                 layout: GroverLayout | None = None) -> Circuit:
    if spec.hash_kind == "sponge":
        return build_sponge_oracle(spec, layout)
    return build_blake_oracle(spec, layout)


# ---------------------------------------------------------------------------
# Diffusion and the full step.

def build_diffusion(message_qubits, width: int | None = None) -> Circuit:
    """Inversion about the average on the message register.

    H and X layers sandwich a phase flip on |1...1>, realised as H on the
    last qubit around a multi-controlled NOT from the remaining ones. Up
    to a global sign this equals the dense reflection matrix with 2/N off
    the diagonal and 2/N - 1 on it.
    """
    message_qubits = tuple(message_qubits)
    n = len(message_qubits)
    if n < 2:
        raise ValueError("diffusion needs a register of width >= 2")
    width = width or (max(message_qubits) + 1)
    circ = Circuit(width, RegisterMap({"m": message_qubits}))
    last = message_qubits[-1]
    rest = message_qubits[:-1]
    for q in message_qubits:
        circ.append(gate_h(q))
    for q in message_qubits:
        circ.append(gate_x(q))
    circ.append(gate_h(last))
    circ.append(gate_mcx(rest, last))
    circ.append(gate_h(last))
    for q in message_qubits:
        circ.append(gate_x(q))
    for q in message_qubits:
        circ.append(gate_h(q))
    return circ


def build_grover_step(spec: OracleSpec,
                      layout: GroverLayout | None = None) -> Circuit:
    """One amplification unit: oracle followed by diffusion.

    Keeps the oracle's midpoint marker (right after the digest check) so
    probes can look inside the step.
    """
    layout = layout or layout_for(spec)
    oracle = build_oracle(spec, layout)
    diffusion = build_diffusion(layout.message_qubits, layout.width)
    step = Circuit(layout.width, layout.register_map(), oracle.classical)
    step.extend(oracle.gates)
    step.markers = dict(oracle.markers)
    step.markers["oracle_end"] = len(step.gates)
    step.extend(diffusion.gates)
    return step


def build_grover_prep(layout: GroverLayout) -> Circuit:
    """Uniform superposition on the message register; ancilla to |->."""
    circ = Circuit(layout.width, layout.register_map())
    for q in layout.message_qubits:
        circ.append(gate_h(q))
    circ.append(gate_x(layout.grover_ancilla))
    circ.append(gate_h(layout.grover_ancilla))
    return circ
