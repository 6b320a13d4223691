"""Circuit IR, textual format, and rewrite passes for star-topology hardware.

The gate set is the platform's: Clifford gates (x, y, z, h, s, sdg, cx) plus
t/tdg, and a reference ry(angle) rotation that the compiler passes eliminate.
Qubit 0 is the leftmost character of every bitstring; all passes are pure
functions returning new circuits.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

SINGLE_QUBIT_KINDS = ("x", "y", "z", "h", "s", "sdg", "t", "tdg")
GATE_KINDS = SINGLE_QUBIT_KINDS + ("ry", "cx")
ROLES = ("state", "eigen", "ancilla")

ANGLE_MATCH_TOL = 1e-9


class CircuitError(ValueError):
    """Malformed circuit, gate, or unsupported rewrite input."""


class CircuitSyntaxError(CircuitError):
    """Parse failure; carries 1-based line and column of the offending token."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Gate:
    """One gate application: `kind` over `qubits`, plus `angle` for ry.

    For cx, qubits = (control, target).
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if self.kind == "cx":
            if len(self.qubits) != 2:
                raise CircuitError("cx takes exactly two qubits")
            if self.qubits[0] == self.qubits[1]:
                raise CircuitError("cx control and target must differ")
        elif len(self.qubits) != 1:
            raise CircuitError(f"{self.kind} takes exactly one qubit")
        if self.kind == "ry":
            if self.angle is None or not math.isfinite(self.angle):
                raise CircuitError("ry needs a finite angle")
        elif self.angle is not None:
            raise CircuitError(f"{self.kind} takes no angle")
        if any(q < 0 for q in self.qubits):
            raise CircuitError("negative qubit index")

    @property
    def qubit(self) -> int:
        return self.qubits[0]

    @property
    def control(self) -> int:
        return self.qubits[0]

    @property
    def target(self) -> int:
        return self.qubits[1]


def x(q: int) -> Gate:
    return Gate("x", (q,))


def y(q: int) -> Gate:
    return Gate("y", (q,))


def z(q: int) -> Gate:
    return Gate("z", (q,))


def h(q: int) -> Gate:
    return Gate("h", (q,))


def s(q: int) -> Gate:
    return Gate("s", (q,))


def sdg(q: int) -> Gate:
    return Gate("sdg", (q,))


def t(q: int) -> Gate:
    return Gate("t", (q,))


def tdg(q: int) -> Gate:
    return Gate("tdg", (q,))


def ry(angle: float, q: int) -> Gate:
    return Gate("ry", (q,), float(angle))


def cx(control: int, target: int) -> Gate:
    return Gate("cx", (control, target))


_INVERSE_KIND = {"x": "x", "y": "y", "z": "z", "h": "h", "s": "sdg", "sdg": "s",
                 "t": "tdg", "tdg": "t", "cx": "cx"}


def invert_gates(gates: Sequence[Gate]) -> list[Gate]:
    """Inverse of a gate sequence: reversed order, each gate inverted."""
    out = []
    for g in reversed(gates):
        if g.kind == "ry":
            out.append(ry(-g.angle, g.qubit))
        else:
            out.append(Gate(_INVERSE_KIND[g.kind], g.qubits))
    return out


def retarget(gates: Sequence[Gate], qubit: int) -> list[Gate]:
    """Move a single-qubit gate sequence onto `qubit`."""
    out = []
    for g in gates:
        if g.kind == "cx":
            raise CircuitError("cannot retarget a two-qubit gate")
        out.append(Gate(g.kind, (qubit,), g.angle))
    return out


@dataclass
class Circuit:
    """Ordered gate list over n_qubits, with optional role labels and
    terminal measure declarations."""

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    roles: dict[int, str] = field(default_factory=dict)
    measures: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise CircuitError("circuit needs at least one qubit")
        self.gates = list(self.gates)
        for g in self.gates:
            self._check_gate(g)
        for q, role in self.roles.items():
            if not 0 <= q < self.n_qubits:
                raise CircuitError(f"role qubit q{q} out of range")
            if role not in ROLES:
                raise CircuitError(f"unknown role {role!r}")
        for q in self.measures:
            if not 0 <= q < self.n_qubits:
                raise CircuitError(f"measure qubit q{q} out of range")

    def _check_gate(self, gate: Gate):
        if any(q >= self.n_qubits for q in gate.qubits):
            raise CircuitError(
                f"gate {gate.kind} touches qubit {max(gate.qubits)} "
                f"but circuit has {self.n_qubits} qubits")

    def add(self, gate: Gate) -> "Circuit":
        self._check_gate(gate)
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.add(g)
        return self

    def ry_angles(self) -> list[float]:
        """Distinct ry angles in order of first appearance."""
        seen: list[float] = []
        for g in self.gates:
            if g.kind == "ry" and not any(
                    abs(g.angle - a) <= ANGLE_MATCH_TOL for a in seen):
                seen.append(g.angle)
        return seen

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.n_qubits == other.n_qubits
                and self.gates == other.gates
                and self.roles == other.roles
                and self.measures == other.measures)


@dataclass(frozen=True)
class Topology:
    """Coupling constraint: unconstrained, or a star with a fixed center."""

    kind: str
    center: int | None = None

    def __post_init__(self):
        if self.kind not in ("unconstrained", "star"):
            raise CircuitError(f"unknown topology kind {self.kind!r}")
        if self.kind == "star" and (self.center is None or self.center < 0):
            raise CircuitError("star topology needs a center qubit")

    @classmethod
    def unconstrained(cls) -> "Topology":
        return cls("unconstrained")

    @classmethod
    def star(cls, center: int) -> "Topology":
        return cls("star", center)


# ---------------------------------------------------------------------------
# Rewrite passes
# ---------------------------------------------------------------------------

def decompose_cry(theta: float, control: int, target: int) -> list[Gate]:
    """Controlled-ry(theta) as two CNOTs and ry(+-theta/2) on the target.

    Gate order is fixed so the control-0 branch composes to identity and the
    control-1 branch to ry(theta); the composed unitary equals
    diag(I, Ry(theta)) in control block order.
    """
    if control == target:
        raise CircuitError("cx control and target must differ")
    half = theta / 2.0
    return [ry(half, target), cx(control, target),
            ry(-half, target), cx(control, target)]


def reverse_cnot(control: int, target: int) -> list[Gate]:
    """CNOT with flipped direction plus four Hadamards; equals the original."""
    if control == target:
        raise CircuitError("cx control and target must differ")
    return [h(control), h(target), cx(target, control), h(control), h(target)]


def legalize_star(circuit: Circuit, topology: Topology) -> Circuit:
    """Rewrite every CNOT so its target is the star center.

    CNOTs already targeting the center pass through; CNOTs controlled by the
    center get the Hadamard-reversed form. A CNOT between two leaves is not
    routable on a star without SWAP insertion and is rejected.
    """
    if topology.kind == "unconstrained":
        return circuit
    center = topology.center
    if center >= circuit.n_qubits:
        raise CircuitError("star center outside the circuit")
    gates: list[Gate] = []
    for g in circuit.gates:
        if g.kind != "cx" or g.target == center:
            gates.append(g)
        elif g.control == center:
            gates.extend(reverse_cnot(g.control, g.target))
        else:
            raise CircuitError(
                f"cx q{g.control} q{g.target} joins two leaf qubits; "
                "not routable on a star topology")
    return Circuit(circuit.n_qubits, gates, dict(circuit.roles),
                   circuit.measures)


def substitute_ry(circuit: Circuit,
                  approximations: Mapping[float, Sequence[Gate]]) -> Circuit:
    """Replace every ry gate with its supplied single-qubit sequence.

    Angles are matched with absolute tolerance 1e-9; a missing angle is an
    error. The sequences are retargeted onto each ry's qubit.
    """
    gates: list[Gate] = []
    for g in circuit.gates:
        if g.kind != "ry":
            gates.append(g)
            continue
        for angle, seq in approximations.items():
            if abs(g.angle - angle) <= ANGLE_MATCH_TOL:
                gates.extend(retarget(seq, g.qubit))
                break
        else:
            raise CircuitError(
                f"no approximation supplied for ry({g.angle!r})")
    return Circuit(circuit.n_qubits, gates, dict(circuit.roles),
                   circuit.measures)


def basis_change(basis: str, qubit: int) -> list[Gate]:
    """Pre-measurement rotation mapping the requested Pauli onto Z."""
    if basis == "Z":
        return []
    if basis == "X":
        return [h(qubit)]
    if basis == "Y":
        return [sdg(qubit), h(qubit)]
    raise CircuitError(f"unknown basis {basis!r}; expected Z, X or Y")


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------
#   qubits <n>
#   role q<i> state|eigen|ancilla
#   x|y|z|h|s|sdg|t|tdg q<i>
#   ry(<radians>) q<i>
#   cx q<c> q<t>
#   measure q<i>          (terminal only)
# '#' starts a comment; tokens are whitespace separated.

_RY_RE = re.compile(r"^ry\((?P<angle>[^)]*)\)$")


def emit_text(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.n_qubits}"]
    for q in sorted(circuit.roles):
        lines.append(f"role q{q} {circuit.roles[q]}")
    for g in circuit.gates:
        if g.kind == "ry":
            lines.append(f"ry({g.angle!r}) q{g.qubit}")
        elif g.kind == "cx":
            lines.append(f"cx q{g.control} q{g.target}")
        else:
            lines.append(f"{g.kind} q{g.qubit}")
    for q in circuit.measures:
        lines.append(f"measure q{q}")
    return "\n".join(lines) + "\n"


def _parse_qubit(token: str, n_qubits: int, line_no: int, col: int) -> int:
    if not token.startswith("q") or not token[1:].isdigit():
        raise CircuitSyntaxError(f"expected qubit token, got {token!r}",
                                 line_no, col)
    q = int(token[1:])
    if q >= n_qubits:
        raise CircuitSyntaxError(
            f"qubit q{q} out of range for {n_qubits} qubits", line_no, col)
    return q


def parse_text(source: str) -> Circuit:
    n_qubits = None
    gates: list[Gate] = []
    roles: dict[int, str] = {}
    measures: list[int] = []
    for line_no, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        tokens = line.split()
        columns = []
        pos = 0
        for tok in tokens:
            pos = line.index(tok, pos)
            columns.append(pos + 1)
            pos += len(tok)
        head = tokens[0]

        def need(count):
            if len(tokens) != count:
                raise CircuitSyntaxError(
                    f"{head!r} expects {count - 1} argument(s)",
                    line_no, columns[0])

        if n_qubits is None:
            if head != "qubits":
                raise CircuitSyntaxError("first statement must be 'qubits <n>'",
                                         line_no, columns[0])
            need(2)
            if not tokens[1].isdigit() or int(tokens[1]) < 1:
                raise CircuitSyntaxError("qubit count must be a positive integer",
                                         line_no, columns[1])
            n_qubits = int(tokens[1])
            continue
        if head == "qubits":
            raise CircuitSyntaxError("duplicate 'qubits' statement",
                                     line_no, columns[0])
        if head == "measure":
            need(2)
            measures.append(_parse_qubit(tokens[1], n_qubits, line_no, columns[1]))
            continue
        if measures:
            raise CircuitSyntaxError("statements after 'measure' are not allowed",
                                     line_no, columns[0])
        if head == "role":
            need(3)
            q = _parse_qubit(tokens[1], n_qubits, line_no, columns[1])
            if tokens[2] not in ROLES:
                raise CircuitSyntaxError(f"unknown role {tokens[2]!r}",
                                         line_no, columns[2])
            roles[q] = tokens[2]
            continue
        if head == "cx":
            need(3)
            c = _parse_qubit(tokens[1], n_qubits, line_no, columns[1])
            tq = _parse_qubit(tokens[2], n_qubits, line_no, columns[2])
            if c == tq:
                raise CircuitSyntaxError("cx control and target must differ",
                                         line_no, columns[2])
            gates.append(cx(c, tq))
            continue
        m = _RY_RE.match(head)
        if m:
            need(2)
            try:
                angle = float(m.group("angle"))
            except ValueError:
                raise CircuitSyntaxError(
                    f"bad ry angle {m.group('angle')!r}", line_no, columns[0])
            if not math.isfinite(angle):
                raise CircuitSyntaxError("ry angle must be finite",
                                         line_no, columns[0])
            gates.append(ry(angle, _parse_qubit(tokens[1], n_qubits,
                                                line_no, columns[1])))
            continue
        if head in SINGLE_QUBIT_KINDS:
            need(2)
            gates.append(Gate(head, (_parse_qubit(tokens[1], n_qubits,
                                                  line_no, columns[1]),)))
            continue
        raise CircuitSyntaxError(f"unknown gate name {head!r}",
                                 line_no, columns[0])
    if n_qubits is None:
        raise CircuitSyntaxError("empty source; expected 'qubits <n>'", 1, 1)
    return Circuit(n_qubits, gates, roles, tuple(measures))
