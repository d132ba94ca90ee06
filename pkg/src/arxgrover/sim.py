"""Dense statevector simulation: gates, marginals, sampling, entropy, noise.

Amplitudes are complex128 over little-endian basis indices (qubit q is bit
q of the index). Sized for the 19-qubit sponge search workload, where the
full register is ~8 MB and every gate touches a slice of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import CNOT, H, MCX, TOFFOLI, X, Z, Circuit, Gate

SQRT_HALF = 1.0 / math.sqrt(2.0)

PAULIS = ("x", "y", "z")


@dataclass(frozen=True)
class Bipartition:
    """A cut of the register into subsystem A and its complement."""

    subsystem_a: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "subsystem_a", frozenset(self.subsystem_a))
        if not self.subsystem_a:
            raise ValueError("subsystem A must be nonempty")

    def complement(self, num_qubits: int) -> frozenset[int]:
        comp = frozenset(range(num_qubits)) - self.subsystem_a
        if not comp:
            raise ValueError("subsystem A must be a proper subset")
        return comp


@dataclass(frozen=True)
class NoiseModel:
    """Stochastic Pauli insertion after every gate, per touched qubit.

    ``mode`` selects how an insertion is drawn:

    - ``"independent"``: X, Y and Z each appear with probability p,
      independently (so a qubit can suffer more than one).
    - ``"uniform"``: with probability p insert exactly one Pauli chosen
      uniformly from {X, Y, Z}.

    The independent form is the default; it is what the error-threshold
    experiments calibrate against. Idle qubits (not touched by the
    preceding gate) never suffer insertions.
    """

    pauli_probability: float
    rng_seed: int = 0
    mode: str = "independent"

    def __post_init__(self):
        if not 0.0 <= self.pauli_probability <= 1.0:
            raise ValueError("pauli_probability must lie in [0, 1]")
        if self.mode not in ("independent", "uniform"):
            raise ValueError("mode must be 'independent' or 'uniform'")


class StateVector:
    """2^w complex amplitudes; gates mutate in place and preserve norm."""

    def __init__(self, num_qubits: int, amplitudes: np.ndarray | None = None):
        if num_qubits < 1:
            raise ValueError("need at least one qubit")
        self.num_qubits = num_qubits
        size = 1 << num_qubits
        if amplitudes is None:
            amplitudes = np.zeros(size, dtype=np.complex128)
            amplitudes[0] = 1.0
        else:
            amplitudes = np.asarray(amplitudes, dtype=np.complex128)
            if amplitudes.shape != (size,):
                raise ValueError(f"expected {size} amplitudes")
        self.amplitudes = amplitudes

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        return cls(num_qubits)

    @classmethod
    def basis(cls, num_qubits: int, value: int) -> "StateVector":
        state = cls(num_qubits)
        state.amplitudes[0] = 0.0
        state.amplitudes[value] = 1.0
        return state

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    # -- basics --------------------------------------------------------------

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def fidelity(self, other: "StateVector") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def _check_gate(self, gate: Gate) -> None:
        for q in gate.qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(
                    f"qubit {q} out of range for {self.num_qubits} qubits")

    def _slices(self, controls, states, target):
        """Index tuples selecting the target=0 / target=1 subspaces with all
        controls satisfied. Numpy axis j holds qubit (w - 1 - j), so the
        views touch only 2^(w - k - 1) amplitudes each.
        """
        w = self.num_qubits
        idx0: list = [slice(None)] * w
        for q, s in zip(controls, states):
            idx0[w - 1 - q] = int(s)
        idx1 = list(idx0)
        idx0[w - 1 - target] = 0
        idx1[w - 1 - target] = 1
        return tuple(idx0), tuple(idx1)

    def apply(self, gate: Gate) -> "StateVector":
        """Apply one gate. Multi-controlled X executes natively here;
        decomposition is a resource-accounting concern, not a simulation one.
        """
        self._check_gate(gate)
        view = self.amplitudes.reshape([2] * self.num_qubits)
        if gate.kind in (X, CNOT, TOFFOLI, MCX):
            i0, i1 = self._slices(gate.controls, gate.control_states,
                                  gate.target)
            tmp = view[i0].copy()
            view[i0] = view[i1]
            view[i1] = tmp
        elif gate.kind == H:
            i0, i1 = self._slices((), (), gate.target)
            a = view[i0].copy()
            b = view[i1]
            view[i0] = (a + b) * SQRT_HALF
            view[i1] = (a - b) * SQRT_HALF
        elif gate.kind == Z:
            _, i1 = self._slices((), (), gate.target)
            view[i1] *= -1.0
        else:
            raise ValueError(f"cannot simulate gate kind {gate.kind!r}")
        return self

    def apply_pauli(self, pauli: str, qubit: int) -> "StateVector":
        view = self.amplitudes.reshape([2] * self.num_qubits)
        i0, i1 = self._slices((), (), qubit)
        if pauli == "x":
            tmp = view[i0].copy()
            view[i0] = view[i1]
            view[i1] = tmp
        elif pauli == "y":
            a = view[i0].copy()
            view[i0] = -1j * view[i1]
            view[i1] = 1j * a
        elif pauli == "z":
            view[i1] *= -1.0
        else:
            raise ValueError(f"unknown Pauli {pauli!r}")
        return self

    def run(self, circuit: Circuit) -> "StateVector":
        if circuit.width != self.num_qubits:
            raise ValueError("circuit width does not match state")
        resolved = circuit.instantiate() if circuit.has_conditions() else circuit
        for gate in resolved.gates:
            self.apply(gate)
        return self

    # -- measurement ----------------------------------------------------------

    def probabilities(self, qubits) -> dict[int, float]:
        """Marginal distribution over the listed qubits.

        Key bit j carries the measured value of ``qubits[j]``, so passing a
        register LSB-first yields keys equal to register values.
        """
        probs = self.marginal_array(qubits)
        return {int(v): float(p) for v, p in enumerate(probs)}

    def marginal_array(self, qubits) -> np.ndarray:
        """Same marginal as ``probabilities`` but as a dense array."""
        qubits = list(qubits)
        if not qubits:
            raise ValueError("need at least one qubit")
        if len(set(qubits)) != len(qubits):
            raise ValueError("duplicate qubits in marginal")
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} out of range")
        weights = np.abs(self.amplitudes) ** 2
        if qubits == list(range(len(qubits))):
            # registers packed into the low bits marginalise by reshape
            return weights.reshape(-1, 1 << len(qubits)).sum(axis=0)
        key = np.zeros(weights.shape, dtype=np.int64)
        idx = np.arange(weights.size)
        for j, q in enumerate(qubits):
            key |= ((idx >> q) & 1) << j
        return np.bincount(key, weights=weights, minlength=1 << len(qubits))

    def sample(self, qubits, rng) -> int:
        """Draw one outcome of measuring the listed qubits."""
        rng = as_rng(rng)
        probs = self.marginal_array(qubits)
        probs = probs / probs.sum()
        return int(rng.choice(probs.size, p=probs))

    # -- entanglement ----------------------------------------------------------

    def entanglement_entropy(self, partition: Bipartition) -> float:
        """Von Neumann entropy (bits) of the reduced state on subsystem A.

        Eigenvalues of the reduced density matrix below 1e-12 are treated
        as exact zeros.
        """
        a_qubits = sorted(partition.subsystem_a)
        b_qubits = sorted(partition.complement(self.num_qubits))
        for q in a_qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} out of range")
        # trace out the larger side: the spectrum is shared
        if len(a_qubits) > len(b_qubits):
            a_qubits, b_qubits = b_qubits, a_qubits
        w = self.num_qubits
        tensor = self.amplitudes.reshape([2] * w)
        # numpy axis j corresponds to qubit (w - 1 - j)
        axes = [w - 1 - q for q in reversed(a_qubits)]
        axes += [w - 1 - q for q in reversed(b_qubits)]
        matrix = tensor.transpose(axes).reshape(1 << len(a_qubits),
                                                1 << len(b_qubits))
        rho = matrix @ matrix.conj().T
        eigenvalues = np.linalg.eigvalsh(rho)
        eigenvalues = eigenvalues[eigenvalues > 1e-12]
        return float(-np.sum(eigenvalues * np.log2(eigenvalues)))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    return state.apply(gate)


def entanglement_entropy(state: StateVector, partition) -> float:
    if not isinstance(partition, Bipartition):
        partition = Bipartition(frozenset(partition))
    return state.entanglement_entropy(partition)


def _insert_noise(state: StateVector, qubits, noise: NoiseModel,
                  rng: np.random.Generator) -> None:
    p = noise.pauli_probability
    if p == 0.0:
        return
    if noise.mode == "independent":
        for q in qubits:
            for pauli in PAULIS:
                if rng.random() < p:
                    state.apply_pauli(pauli, q)
    else:
        for q in qubits:
            if rng.random() < p:
                state.apply_pauli(PAULIS[rng.integers(3)], q)


def run_noisy_trajectory(circuit: Circuit, noise: NoiseModel,
                         initial: StateVector) -> StateVector:
    """Execute one noise trajectory: after each gate, every qubit the gate
    touched may suffer Pauli insertions per the noise model. At p = 0 this
    is bit-exact with noiseless execution.
    """
    if circuit.width != initial.num_qubits:
        raise ValueError("circuit width does not match state")
    rng = np.random.default_rng(noise.rng_seed)
    state = initial.copy()
    resolved = circuit.instantiate() if circuit.has_conditions() else circuit
    for gate in resolved.gates:
        state.apply(gate)
        _insert_noise(state, gate.qubits, noise, rng)
    return state
