"""Fast execution paths for repeated search circuits.

Between Grover steps the register is supported on at most a few hundred
basis states (message superposition times the search ancilla); classical
oracle gates are basis permutations, so they preserve that support size.
Tracking (index, amplitude) pairs instead of the dense vector makes a step
cost O(support) instead of O(2^w).

The clean-oracle shortcut is compiled from the built circuit itself: the
compute half is run through the bulk reversible simulator to produce its
basis-state table, and the uncompute half cancels it by construction (gate
reversal of self-inverse gates), leaving only the ancilla flip on digest
matches. Noisy trajectories replay the lowered gate list on the support,
inserting Pauli errors at positions drawn up front, so every insertion sees
exactly the mid-circuit state the gate sequence produces.

All paths agree with dense gate-by-gate simulation up to a global sign
introduced by the closed-form diffusion reflection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import (CNOT, H, MCX, TOFFOLI, X, Z, Circuit, Gate,
                      lower_circuit, reversible_run_bulk)
from .sim import NoiseModel, PAULIS, SQRT_HALF, StateVector, as_rng

_PRUNE_EPS = 1e-14


class SparseState:
    """Statevector as parallel (basis index, amplitude) arrays."""

    __slots__ = ("width", "indices", "amps")

    def __init__(self, width: int, indices: np.ndarray, amps: np.ndarray):
        self.width = width
        self.indices = indices
        self.amps = amps

    @classmethod
    def from_dense(cls, psi: np.ndarray, width: int) -> "SparseState":
        nz = np.nonzero(np.abs(psi) > 0)[0]
        return cls(width, nz.astype(np.int64), psi[nz].astype(np.complex128))

    @classmethod
    def zero(cls, width: int) -> "SparseState":
        return cls(width, np.zeros(1, dtype=np.int64),
                   np.ones(1, dtype=np.complex128))

    def copy(self) -> "SparseState":
        return SparseState(self.width, self.indices.copy(), self.amps.copy())

    def to_dense(self) -> np.ndarray:
        psi = np.zeros(1 << self.width, dtype=np.complex128)
        np.add.at(psi, self.indices, self.amps)
        return psi

    def to_statevector(self) -> StateVector:
        return StateVector(self.width, self.to_dense())

    # -- gates ---------------------------------------------------------------

    def _control_mask(self, gate: Gate) -> np.ndarray:
        mask = np.ones(self.indices.shape, dtype=bool)
        for q, s in zip(gate.controls, gate.control_states):
            mask &= ((self.indices >> q) & 1) == s
        return mask

    def apply_gate(self, gate: Gate) -> "SparseState":
        if gate.kind in (X, CNOT, TOFFOLI, MCX):
            tbit = np.int64(1 << gate.target)
            if gate.controls:
                mask = self._control_mask(gate)
                self.indices = np.where(mask, self.indices ^ tbit,
                                        self.indices)
            else:
                self.indices = self.indices ^ tbit
        elif gate.kind == Z:
            bit = (self.indices >> gate.target) & 1
            self.amps = np.where(bit == 1, -self.amps, self.amps)
        elif gate.kind == H:
            self._apply_h(gate.target)
        else:
            raise ValueError(f"cannot simulate gate kind {gate.kind!r}")
        return self

    def _apply_h(self, target: int) -> None:
        tbit = np.int64(1 << target)
        lo = self.indices & ~tbit
        bit = (self.indices & tbit) != 0
        base, inverse = np.unique(lo, return_inverse=True)
        a0 = np.zeros(base.size, dtype=np.complex128)
        a1 = np.zeros(base.size, dtype=np.complex128)
        np.add.at(a0, inverse[~bit], self.amps[~bit])
        np.add.at(a1, inverse[bit], self.amps[bit])
        new0 = (a0 + a1) * SQRT_HALF
        new1 = (a0 - a1) * SQRT_HALF
        indices = np.concatenate([base, base | tbit])
        amps = np.concatenate([new0, new1])
        keep = np.abs(amps) > _PRUNE_EPS
        self.indices = indices[keep]
        self.amps = amps[keep]

    def apply_pauli(self, pauli: str, qubit: int) -> "SparseState":
        tbit = np.int64(1 << qubit)
        bit = (self.indices & tbit) != 0
        if pauli == "x":
            self.indices = self.indices ^ tbit
        elif pauli == "y":
            self.amps = self.amps * np.where(bit, -1j, 1j)
            self.indices = self.indices ^ tbit
        elif pauli == "z":
            self.amps = np.where(bit, -self.amps, self.amps)
        else:
            raise ValueError(f"unknown Pauli {pauli!r}")
        return self

    def replay(self, gates) -> "SparseState":
        for g in gates:
            self.apply_gate(g)
        return self

    # -- message-register operations ------------------------------------------

    def reflect_low(self, m: int) -> "SparseState":
        """Inversion about the average over the low m qubits."""
        size = 1 << m
        high = self.indices >> m
        low = self.indices & (size - 1)
        rest = self.width - m
        if rest <= 16:
            # group without sorting: the high-bit space is small
            present = np.zeros(1 << rest, dtype=bool)
            present[high] = True
            groups = np.nonzero(present)[0].astype(np.int64)
            lookup = np.zeros(1 << rest, dtype=np.int64)
            lookup[groups] = np.arange(groups.size)
            inverse = lookup[high]
        else:
            groups, inverse = np.unique(high, return_inverse=True)
        dense = np.zeros((groups.size, size), dtype=np.complex128)
        dense[inverse, low] = self.amps
        mean = dense.mean(axis=1)
        dense = 2.0 * mean[:, None] - dense
        idx = (groups[:, None] << m) | np.arange(size)[None, :]
        amps = dense.reshape(-1)
        indices = idx.reshape(-1)
        keep = np.abs(amps) > _PRUNE_EPS
        self.indices = indices[keep]
        self.amps = amps[keep]
        return self

    def marginal_low(self, m: int) -> np.ndarray:
        probs = np.zeros(1 << m, dtype=np.float64)
        np.add.at(probs, self.indices & ((1 << m) - 1),
                  np.abs(self.amps) ** 2)
        return probs

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))


@dataclass(frozen=True)
class _Event:
    step: int
    gate: int
    qubit: int
    pauli: str


def compile_permutation(gates, width: int,
                        start: np.ndarray | None = None) -> np.ndarray:
    """Compose classical gates into one basis-state table P[i] = image of i."""
    if width > 26:
        raise ValueError("permutation tables limited to 26 qubits")
    perm = (np.arange(1 << width, dtype=np.uint32) if start is None
            else start.copy())
    for g in gates:
        if not g.is_classical:
            raise ValueError(f"{g.kind} gate cannot join a permutation block")
        tbit = np.uint32(1 << g.target)
        if not g.controls:
            perm ^= tbit
            continue
        acc = None
        for q, s in zip(g.controls, g.control_states):
            bits = perm >> np.uint32(q)
            if s == 0:
                bits = ~bits
            acc = bits if acc is None else acc & bits
        perm ^= (acc & np.uint32(1)) << np.uint32(g.target)
    return perm


def invert_permutation(perm: np.ndarray) -> np.ndarray:
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size, dtype=perm.dtype)
    return inv


class _OracleTables:
    """Prefix permutations of the oracle gate list at block boundaries.

    Both the prefix tables and their inverses are kept, so advancing a
    sparse support across a block span costs two O(support) gathers, with
    gate replay only for the stub at each end. The gate-list end is always
    a boundary, making whole-oracle application a single jump.
    """

    def __init__(self, gates, width: int, block: int = 128):
        self.count = len(gates)
        self.boundaries = list(range(0, self.count, block)) + [self.count]
        prefixes = [np.arange(1 << width, dtype=np.uint32)]
        for lo, hi in zip(self.boundaries[:-1], self.boundaries[1:]):
            prefixes.append(compile_permutation(gates[lo:hi], width,
                                                start=prefixes[-1]))
        self.q = prefixes
        self.qinv = [invert_permutation(p) for p in prefixes]

    def span(self, begin: int, end: int) -> tuple[int, int]:
        """Widest boundary interval inside [begin, end], as boundary ids."""
        import bisect
        first = bisect.bisect_left(self.boundaries, begin)
        last = bisect.bisect_right(self.boundaries, end) - 1
        return first, last

    def jump(self, indices: np.ndarray, from_id: int,
             to_id: int) -> np.ndarray:
        return self.q[to_id][self.qinv[from_id][indices]].astype(np.int64)


class GroverRunner:
    """Compiled executor for one search instance.

    Built from the prep and step circuits exactly as the builders emit
    them; the lowered (elementary-gate) form of the step drives both
    resource-faithful noise insertion and the support replays.
    """

    def __init__(self, prep: Circuit, step: Circuit, layout):
        self.width = step.width
        self.message_qubits = tuple(layout.message_qubits)
        self.m = len(self.message_qubits)
        if self.message_qubits != tuple(range(self.m)):
            raise ValueError("message register must occupy the low qubits")
        self.grover_ancilla = layout.grover_ancilla
        work = layout.adder_ancillas[0]

        step = step.instantiate()
        mid = step.markers["midpoint"]
        end = step.markers["oracle_end"]
        check = step.gates[mid - 1]
        if check.kind != MCX or check.target != self.grover_ancilla:
            raise ValueError("step circuit lacks the digest check before its "
                             "midpoint marker")
        self._digest_controls = check.controls
        self._digest_states = check.control_states

        # the compiled oracle table assumes the work registers enter in |0>
        self._work_mask = np.int64(sum(1 << q for q in layout.adder_ancillas))
        half = Circuit(step.width)
        for g in step.gates[:mid - 1]:
            half.append(g)
        self._half_table = reversible_run_bulk(
            half, np.arange(1 << 16, dtype=np.uint64)).astype(np.int64)
        match = np.ones(self._half_table.shape, dtype=bool)
        for q, s in zip(self._digest_controls, self._digest_states):
            match &= ((self._half_table >> q) & 1) == s
        self._flip16 = match  # digest hit per 16-bit register value

        lowered = lower_circuit(step, work_qubit=work)
        self.step_gates = lowered.gates
        self.oracle_len = lowered.markers["oracle_end"]
        self.oracle_gates = self.step_gates[:self.oracle_len]
        self.diffusion_gates = self.step_gates[self.oracle_len:]

        self.touch = np.array([len(g.qubits) for g in self.step_gates],
                              dtype=np.int64)
        self.slots_per_step = int(self.touch.sum())
        self._slot_cum = np.concatenate([[0], np.cumsum(self.touch)])

        self._prep = SparseState.zero(self.width).replay(
            prep.instantiate().gates if prep.has_conditions() else prep.gates)
        self._states: list[SparseState] = [self._prep.copy()]
        self._tables: _OracleTables | None = None

    # -- clean evolution -------------------------------------------------------

    def _oracle_fastpath_ok(self, state: SparseState) -> bool:
        return bool(np.all((state.indices & self._work_mask) == 0))

    def apply_oracle(self, state: SparseState) -> SparseState:
        if self._oracle_fastpath_ok(state):
            low16 = state.indices & np.int64(0xFFFF)
            flip = self._flip16[low16]
            gbit = np.int64(1 << self.grover_ancilla)
            state.indices = np.where(flip, state.indices ^ gbit,
                                     state.indices)
        else:
            # dirtied work registers void the compiled table; jump the
            # support through the checkpointed prefix permutations instead
            self._advance_oracle(state, 0, self.oracle_len)
        return state

    def clean_step(self, state: SparseState) -> SparseState:
        self.apply_oracle(state)
        state.reflect_low(self.m)
        return state

    def state_after(self, steps: int) -> SparseState:
        while len(self._states) <= steps:
            nxt = self._states[-1].copy()
            self.clean_step(nxt)
            self._states.append(nxt)
        return self._states[steps]

    def midpoint_state(self, steps_before: int) -> SparseState:
        """State right after the digest check of step ``steps_before + 1``.

        Maps the clean step-start support through the compute half's basis
        table and applies the conditional ancilla flip, i.e. the state at
        the oracle's midpoint marker.
        """
        state = self.state_after(steps_before).copy()
        if not self._oracle_fastpath_ok(state):
            raise ValueError("midpoint shortcut requires clean work registers")
        low16 = state.indices & np.int64(0xFFFF)
        gbit = np.int64(1 << self.grover_ancilla)
        mapped = (state.indices & ~np.int64(0xFFFF)) | self._half_table[low16]
        state.indices = np.where(self._flip16[low16], mapped ^ gbit, mapped)
        return state

    def marginal_after(self, steps: int) -> np.ndarray:
        return self.state_after(steps).marginal_low(self.m)

    # -- noisy trajectories ------------------------------------------------------

    def _draw_events(self, steps: int, noise: NoiseModel,
                     rng: np.random.Generator) -> list[_Event]:
        mult = 3 if noise.mode == "independent" else 1
        per_step = self.slots_per_step * mult
        total = steps * per_step
        count = rng.binomial(total, noise.pauli_probability)
        if count == 0:
            return []
        positions = np.sort(rng.choice(total, size=count, replace=False))
        events = []
        for pos in positions:
            step_idx, rem = divmod(int(pos), per_step)
            slot, pauli_idx = divmod(rem, mult)
            gate = int(np.searchsorted(self._slot_cum, slot, side="right")) - 1
            qubit = self.step_gates[gate].qubits[slot - self._slot_cum[gate]]
            pauli = (PAULIS[rng.integers(3)] if noise.mode == "uniform"
                     else PAULIS[pauli_idx])
            events.append(_Event(step_idx, gate, qubit, pauli))
        return events

    def _advance_oracle(self, state: SparseState, begin: int,
                        end: int) -> None:
        """Run oracle gates[begin:end] on the support via prefix tables."""
        if self._tables is None:
            self._tables = _OracleTables(self.oracle_gates, self.width)
        tables = self._tables
        first, last = tables.span(begin, end)
        if last < first:
            state.replay(self.oracle_gates[begin:end])
            return
        state.replay(self.oracle_gates[begin:tables.boundaries[first]])
        if last > first:
            state.indices = tables.jump(state.indices, first, last)
        state.replay(self.oracle_gates[tables.boundaries[last]:end])

    def _noisy_step(self, state: SparseState, events: list[_Event]) -> None:
        oracle_events = [e for e in events if e.gate < self.oracle_len]
        diffusion_events = [e for e in events if e.gate >= self.oracle_len]
        pos = 0
        for event in oracle_events:
            self._advance_oracle(state, pos, event.gate + 1)
            state.apply_pauli(event.pauli, event.qubit)
            pos = event.gate + 1
        self._advance_oracle(state, pos, self.oracle_len)
        if not diffusion_events:
            state.reflect_low(self.m)
            return
        pos = self.oracle_len
        for event in diffusion_events:
            state.replay(self.step_gates[pos:event.gate + 1])
            state.apply_pauli(event.pauli, event.qubit)
            pos = event.gate + 1
        state.replay(self.step_gates[pos:])

    def run_noisy(self, steps: int, noise: NoiseModel, rng) -> SparseState:
        """One trajectory; zero insertions reduce to the clean path."""
        rng = as_rng(rng)
        events = self._draw_events(steps, noise, rng)
        by_step: dict[int, list[_Event]] = {}
        for e in events:
            by_step.setdefault(e.step, []).append(e)
        state = self._prep.copy()
        for k in range(steps):
            step_events = by_step.get(k)
            if not step_events:
                self.clean_step(state)
            else:
                self._noisy_step(state, step_events)
        return state
