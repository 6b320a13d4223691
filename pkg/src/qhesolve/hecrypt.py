"""Client side of the masking protocol.

The client hides the right-hand side of A x = b with a binary key a:
substituting x = y + a gives A y = b', b' = b - A a. The server only ever
sees (A, b') through the submitted circuit; the key never leaves this module.
Results decrypt as x = y + a.

The matrix A stays public by construction, so the key space is 2^n; the
scheme is reproduced as designed, without hardening.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import qserve, qsim
from .circ import emit_text
from .hhl import (ANCILLA_QUBIT, STATE_QUBIT, LinearSystem, SolutionReport,
                  SolverConfig, classical_solve, compile_solver_circuit,
                  eigendecompose, extract_solution)


class MaskingError(ValueError):
    pass


@dataclass(frozen=True)
class MaskKey:
    """Private binary mask; one component per unknown."""

    a: tuple[int, ...]

    def __post_init__(self):
        if not self.a:
            raise MaskingError("key must have at least one component")
        if any(bit not in (0, 1) for bit in self.a):
            raise MaskingError("key components must be 0 or 1")

    def vector(self) -> np.ndarray:
        return np.array(self.a, dtype=float)


@dataclass(frozen=True)
class MaskedSystem:
    """What the server may see: the public matrix and the masked vector."""

    a_matrix: np.ndarray
    b_prime: np.ndarray
    b_prime_norm: float


def keygen(n: int, seed: int) -> MaskKey:
    """Uniform binary key; deterministic for a fixed seed."""
    if n < 1:
        raise MaskingError("key length must be >= 1")
    rng = np.random.default_rng(seed)
    return MaskKey(tuple(int(b) for b in rng.integers(0, 2, size=n)))


def encrypt(system: LinearSystem, key: MaskKey) -> MaskedSystem:
    """Mask the right-hand side: b' = b - A a. A itself is untouched."""
    if len(key.a) != 2:
        raise MaskingError("key length must match the system dimension")
    b_prime = system.b - system.a @ key.vector()
    norm = float(np.linalg.norm(b_prime))
    if norm <= 1e-12:
        raise MaskingError(
            "masked vector vanishes (b equals A a); resample the key")
    return MaskedSystem(system.a, b_prime, norm)


def decrypt(result: np.ndarray, key: MaskKey) -> np.ndarray:
    """Unmask a solution vector: x_i = r_i + a_i."""
    result = np.asarray(result, dtype=float)
    if result.shape != (len(key.a),):
        raise MaskingError("result length must match the key")
    return result + key.vector()


def solve_encrypted(system: LinearSystem, key: MaskKey,
                    server: tuple[str, int] | str,
                    config: SolverConfig) -> SolutionReport:
    """Full delegated solve: mask, compile, submit, rescale, decrypt.

    Only (A, b'/||b'||) reach the wire, encoded in the circuit; the job also
    carries ||b'|| (a function of public data). The returned report's
    solution field holds the decrypted answer; the pre-decryption vector
    stays in masked_solution.
    """
    masked = encrypt(system, key)
    eig = eigendecompose(masked.a_matrix)
    b_unit = masked.b_prime / masked.b_prime_norm
    circuit, c_value = compile_solver_circuit(eig, b_unit, config)

    job = qserve.Job(
        id=f"solve-{config.mode}-{config.execution}",
        circuit=emit_text(circuit),
        mode=config.execution,
        shots=config.shots if config.execution == "sampled" else None,
        seed=config.seed if config.execution == "sampled" else None,
        postselect=(ANCILLA_QUBIT, 1),
        bases=tuple((b, STATE_QUBIT) for b in "ZXY"),
        b_prime_norm=masked.b_prime_norm,
    )
    response = qserve.submit(server, job)

    masked_ideal = classical_solve(LinearSystem(masked.a_matrix, masked.b_prime))
    if config.execution == "analytic":
        amps = np.array([complex(re, im) for re, im in response["amplitudes"]])
        state = qsim.StateVector.from_amplitudes(amps)
        solution_amps = qsim.reduced_pure_state(state, STATE_QUBIT)
        report = extract_solution(
            solution_amps, response["success_probability"], config,
            masked.b_prime_norm, c_value=c_value, b_unit=b_unit,
            ideal=masked_ideal)
    else:
        tables = {}
        kept = raw = 0
        for item in response["results"]:
            tables[item["basis"]] = qsim.Counts(
                item["kept_shots"], dict(item["counts"]))
            kept += item["kept_shots"]
            raw += item["raw_shots"]
        expectations = qsim.pauli_expectations(tables["Z"], tables["X"],
                                               tables["Y"], STATE_QUBIT)
        report = extract_solution(
            expectations, kept / raw, config, masked.b_prime_norm,
            c_value=c_value, b_unit=b_unit, ideal=masked_ideal)

    plaintext = classical_solve(system)
    decrypted = decrypt(report.solution, key)
    return replace(
        report,
        masked_solution=report.solution,
        solution=decrypted,
        relative_error=float(np.linalg.norm(decrypted - plaintext)
                             / np.linalg.norm(plaintext)),
    )
