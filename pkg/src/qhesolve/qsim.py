"""Dense statevector simulation with sampling, post-selection, and tomography.

Conventions, fixed across the package:
  - qubit 0 is the leftmost bitstring character, i.e. the most significant
    index bit of the amplitude array;
  - all randomness flows through numpy's default_rng (PCG64), seeded
    explicitly, so sampled results are stable across runs and releases;
  - operations are pure: they return new values and never mutate inputs.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .circ import Circuit, Gate, basis_change

log = logging.getLogger(__name__)

MAX_UNITARY_QUBITS = 6

_SQ2 = 1.0 / math.sqrt(2.0)
GATE_MATRICES = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "t": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    "tdg": np.array([[1, 0], [0, np.exp(-1j * math.pi / 4)]], dtype=complex),
}


class SimulationError(ValueError):
    pass


class ZeroProbabilityError(SimulationError):
    """Post-selection on a branch whose Born probability vanishes."""


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def gate_matrix(gate: Gate) -> np.ndarray:
    """2x2 matrix of a single-qubit gate."""
    if gate.kind == "ry":
        return ry_matrix(gate.angle)
    if gate.kind == "cx":
        raise SimulationError("cx has no single-qubit matrix")
    return GATE_MATRICES[gate.kind]


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) < tol)


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitudes of n_qubits qubits (length 2**n)."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (2 ** self.n_qubits,):
            raise SimulationError(
                f"expected {2 ** self.n_qubits} amplitudes, got {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-9:
            raise SimulationError(f"state norm {norm} is not 1")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)

    @classmethod
    def zero(cls, n_qubits: int) -> "StateVector":
        amps = np.zeros(2 ** n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        n = int(round(math.log2(len(amps))))
        if 2 ** n != len(amps):
            raise SimulationError("amplitude count must be a power of two")
        return cls(n, amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(frozen=True)
class Counts:
    """Sampled measurement table: bitstring -> count, totalling `shots`."""

    shots: int
    table: dict[str, int]

    def __post_init__(self):
        if not self.table and self.shots != 0:
            raise SimulationError("empty table with nonzero shots")
        lengths = {len(k) for k in self.table}
        if len(lengths) > 1:
            raise SimulationError("inconsistent bitstring lengths")
        for key, count in self.table.items():
            if set(key) - {"0", "1"}:
                raise SimulationError(f"bad bitstring {key!r}")
            if count < 0:
                raise SimulationError("negative count")
        if sum(self.table.values()) != self.shots:
            raise SimulationError("counts do not sum to shots")

    @property
    def n_qubits(self) -> int:
        if not self.table:
            raise SimulationError("empty counts have no qubit count")
        return len(next(iter(self.table)))


@dataclass(frozen=True)
class PauliExpectations:
    """Single-qubit Z/X/Y expectations with their standard errors.

    shots_per_basis is 0 in analytic mode, where the sigmas are exactly 0.
    """

    z: float
    x: float
    y: float
    sigma_z: float = 0.0
    sigma_x: float = 0.0
    sigma_y: float = 0.0
    shots_per_basis: int = 0

    def bloch_norm_sq(self) -> float:
        return self.x ** 2 + self.y ** 2 + self.z ** 2


def _check_qubit(n_qubits: int, qubit: int):
    if not 0 <= qubit < n_qubits:
        raise SimulationError(f"qubit {qubit} out of range for {n_qubits} qubits")


def _apply_single(tensor: np.ndarray, u: np.ndarray, qubit: int) -> np.ndarray:
    # tensor has one axis per qubit (extra trailing axes pass through)
    moved = np.tensordot(u, tensor, axes=([1], [qubit]))
    return np.moveaxis(moved, 0, qubit)


def _apply_cnot(tensor: np.ndarray, control: int, target: int) -> np.ndarray:
    def branch(cv, tv):
        idx = [slice(None)] * tensor.ndim
        idx[control], idx[target] = cv, tv
        return tuple(idx)

    out = tensor.copy()
    out[branch(1, 0)] = tensor[branch(1, 1)]
    out[branch(1, 1)] = tensor[branch(1, 0)]
    return out


def _apply_gate_tensor(tensor: np.ndarray, gate: Gate) -> np.ndarray:
    if gate.kind == "cx":
        return _apply_cnot(tensor, gate.control, gate.target)
    return _apply_single(tensor, gate_matrix(gate), gate.qubit)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate; indices are checked, the norm is preserved."""
    for q in gate.qubits:
        _check_qubit(state.n_qubits, q)
    tensor = state.amps.reshape([2] * state.n_qubits)
    tensor = _apply_gate_tensor(tensor, gate)
    return StateVector(state.n_qubits, tensor.reshape(-1))


def run_statevector(circuit: Circuit,
                    initial: StateVector | None = None) -> StateVector:
    """Apply the circuit's gates in order to `initial` (default |0...0>)."""
    if initial is None:
        initial = StateVector.zero(circuit.n_qubits)
    if initial.n_qubits != circuit.n_qubits:
        raise SimulationError(
            f"circuit has {circuit.n_qubits} qubits, state has {initial.n_qubits}")
    tensor = initial.amps.reshape([2] * circuit.n_qubits)
    for gate in circuit.gates:
        tensor = _apply_gate_tensor(tensor, gate)
    return StateVector(circuit.n_qubits, tensor.reshape(-1))


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Full 2^n x 2^n matrix of the circuit (n <= 6)."""
    n = circuit.n_qubits
    if n > MAX_UNITARY_QUBITS:
        raise SimulationError(
            f"circuit_unitary supports at most {MAX_UNITARY_QUBITS} qubits")
    dim = 2 ** n
    # Columns are basis-state images; one trailing axis carries the column index.
    tensor = np.eye(dim, dtype=complex).reshape([2] * n + [dim])
    for gate in circuit.gates:
        tensor = _apply_gate_tensor(tensor, gate)
    return tensor.reshape(dim, dim)


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Global-phase-invariant distance 1 - |Tr(U^dag V)| / dim."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return float(1.0 - abs(np.trace(u.conj().T @ v)) / u.shape[0])


def basis_seeds(seed: int, count: int) -> list[int]:
    """Per-basis child seeds derived deterministically from one job seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]


def sample_counts(state: StateVector, shots: int, seed: int) -> Counts:
    """Draw i.i.d. outcomes from |amp|^2; deterministic for a fixed seed."""
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    probs = state.probabilities()
    probs = probs / probs.sum()
    outcomes = rng.choice(len(probs), size=shots, p=probs)
    values, counts = np.unique(outcomes, return_counts=True)
    n = state.n_qubits
    table = {format(int(v), f"0{n}b"): int(c) for v, c in zip(values, counts)}
    return Counts(shots, table)


def postselect(state: StateVector, qubit: int, outcome: int) -> tuple[StateVector, float]:
    """Condition on `qubit` reading `outcome`; returns (renormalized state,
    Born probability of that outcome)."""
    _check_qubit(state.n_qubits, qubit)
    if outcome not in (0, 1):
        raise SimulationError("outcome must be 0 or 1")
    tensor = state.amps.reshape([2] * state.n_qubits)
    kept = np.zeros_like(tensor)
    idx = [slice(None)] * state.n_qubits
    idx[qubit] = outcome
    kept[tuple(idx)] = tensor[tuple(idx)]
    prob = float(np.sum(np.abs(kept) ** 2))
    if prob <= 1e-12:
        raise ZeroProbabilityError(
            f"outcome {outcome} on qubit {qubit} has vanishing probability")
    return StateVector(state.n_qubits, kept.reshape(-1) / math.sqrt(prob)), prob


def postselect_counts(counts: Counts, qubit: int, outcome: int) -> Counts:
    """Keep only shots whose bit at `qubit` equals `outcome`."""
    if not counts.table:
        raise SimulationError("empty counts")
    _check_qubit(counts.n_qubits, qubit)
    table = {k: v for k, v in counts.table.items() if k[qubit] == str(outcome)}
    kept = sum(table.values())
    if kept == 0:
        raise ZeroProbabilityError(
            f"no shots with qubit {qubit} = {outcome} survive post-selection")
    return Counts(kept, table)


def _counts_expectation(counts: Counts, qubit: int) -> tuple[float, float, int]:
    if not counts.table:
        raise SimulationError("empty counts")
    _check_qubit(counts.n_qubits, qubit)
    total = counts.shots
    plus = sum(v for k, v in counts.table.items() if k[qubit] == "0")
    e = (plus - (total - plus)) / total
    sigma = math.sqrt(max(0.0, (1.0 - e * e) / total))
    return e, sigma, total


def pauli_expectations(z_counts: Counts, x_counts: Counts, y_counts: Counts,
                       qubit: int) -> PauliExpectations:
    """Expectations from three basis-rotated runs of the same circuit.

    Each expectation is (N+ - N-)/N on the chosen qubit and each sigma is
    sqrt((1 - e^2)/N), the Poissonian counting error.
    """
    ez, sz, nz = _counts_expectation(z_counts, qubit)
    ex, sx, nx = _counts_expectation(x_counts, qubit)
    ey, sy, ny = _counts_expectation(y_counts, qubit)
    return PauliExpectations(z=ez, x=ex, y=ey, sigma_z=sz, sigma_x=sx,
                             sigma_y=sy, shots_per_basis=min(nz, nx, ny))


def reduced_density(state: StateVector, qubit: int) -> np.ndarray:
    """2x2 reduced density matrix of one qubit."""
    _check_qubit(state.n_qubits, qubit)
    tensor = state.amps.reshape([2] * state.n_qubits)
    moved = np.moveaxis(tensor, qubit, 0).reshape(2, -1)
    return moved @ moved.conj().T


def analytic_expectations(state: StateVector, qubit: int) -> PauliExpectations:
    """Exact Z/X/Y expectations of one qubit; sigmas are 0, shots 0."""
    rho = reduced_density(state, qubit)
    return PauliExpectations(
        z=float((rho[0, 0] - rho[1, 1]).real),
        x=float(2.0 * rho[0, 1].real),
        y=float(-2.0 * rho[0, 1].imag),
    )


def reduced_pure_state(state: StateVector, qubit: int,
                       tol: float = 1e-6) -> np.ndarray:
    """The qubit's pure reduced state as a 2-vector (phase arbitrary).

    Errors if the qubit is entangled with the rest beyond `tol` in purity.
    """
    rho = reduced_density(state, qubit)
    purity = float(np.trace(rho @ rho).real)
    if 1.0 - purity > tol:
        raise SimulationError(
            f"qubit {qubit} is not in a pure reduced state (purity {purity})")
    eigvals, eigvecs = np.linalg.eigh(rho)
    return eigvecs[:, int(np.argmax(eigvals))]


def bloch_point(vec) -> tuple[float, float, float]:
    """(x, y, z) Pauli expectations of a normalized 1-qubit pure state."""
    a0, a1 = np.asarray(vec, dtype=complex)
    cross = np.conj(a0) * a1
    return (float(2.0 * cross.real), float(2.0 * cross.imag),
            float(abs(a0) ** 2 - abs(a1) ** 2))


def fidelity_from_expectations(e: PauliExpectations, ideal) -> float:
    """<ideal| rho_exp |ideal> with rho_exp = (I + xX + yY + zZ)/2.

    A Bloch vector slightly outside the ball (finite-shot fluctuation) is
    rescaled onto it and logged; an excess beyond 3 sigma is an error.
    """
    ideal = np.asarray(ideal.amps if isinstance(ideal, StateVector) else ideal,
                       dtype=complex)
    if ideal.shape != (2,):
        raise SimulationError("ideal state must be a single qubit")
    if abs(np.linalg.norm(ideal) - 1.0) > 1e-9:
        raise SimulationError("ideal state must be normalized")
    x_, y_, z_ = e.x, e.y, e.z
    nsq = x_ * x_ + y_ * y_ + z_ * z_
    max_sigma = max(e.sigma_x, e.sigma_y, e.sigma_z)
    if nsq > 1.0 + max(3.0 * max_sigma, 1e-9):
        raise SimulationError(
            f"inconsistent tomography: Bloch norm^2 {nsq} exceeds the ball "
            f"beyond 3 sigma")
    if nsq > 1.0:
        scale = 1.0 / math.sqrt(nsq)
        log.info("clamping super-normalized Bloch vector (norm^2 %.3e) "
                 "onto the ball", nsq)
        x_, y_, z_ = x_ * scale, y_ * scale, z_ * scale
    ix, iy, iz = bloch_point(ideal)
    return 0.5 * (1.0 + x_ * ix + y_ * iy + z_ * iz)


def measured_counts(circuit: Circuit, basis: str, qubit: int, shots: int,
                    seed: int) -> Counts:
    """Run the circuit, rotate `qubit` into `basis`, and sample."""
    state = run_statevector(circuit)
    for gate in basis_change(basis, qubit):
        state = apply_gate(state, gate)
    return sample_counts(state, shots, seed)
