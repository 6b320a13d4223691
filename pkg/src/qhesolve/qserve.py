"""Untrusted execution service: framed-JSON jobs over TCP, plus the client.

Wire format: each message is one frame, a 4-byte big-endian payload length
followed by that many bytes of UTF-8 JSON. One request frame yields exactly
one response frame; malformed payloads get an error response and the
connection stays open. The server executes circuits it is sent and nothing
else; it depends only on the simulator and the IR, so no key material is
even importable here.

Request fields: id, circuit (text format), mode ("analytic"|"sampled"),
shots/seed (sampled), postselect {qubit, outcome}, bases [{basis, qubit}],
noise_p (optional depolarizing knob, sampled only), b_prime_norm (opaque
passthrough). Responses carry either amplitudes + success_probability or
per-basis counts with raw/kept shot totals, or error + detail.
"""
from __future__ import annotations

import json
import logging
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass

import numpy as np

from . import circ, qsim

log = logging.getLogger(__name__)

FRAME_HEADER = struct.Struct(">I")
MAX_FRAME_BYTES = 16 * 1024 * 1024
DEFAULT_TIMEOUT = 30.0

_PAULI_KINDS = ("x", "y", "z")


class TransportError(ConnectionError):
    """Client-side connection, framing, or timeout failure."""


class ServerError(RuntimeError):
    """Error payload returned by the server, surfaced verbatim."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class Job:
    """One execution request. bases are (basis, qubit) pairs."""

    id: str
    circuit: str
    mode: str = "analytic"
    shots: int | None = None
    seed: int | None = None
    postselect: tuple[int, int] | None = None
    bases: tuple[tuple[str, int], ...] = ()
    noise_p: float | None = None
    b_prime_norm: float | None = None

    def to_payload(self) -> dict:
        payload = {"id": self.id, "circuit": self.circuit, "mode": self.mode}
        if self.mode == "sampled":
            payload["shots"] = self.shots
            payload["seed"] = self.seed
        if self.postselect is not None:
            payload["postselect"] = {"qubit": self.postselect[0],
                                     "outcome": self.postselect[1]}
        if self.bases:
            payload["bases"] = [{"basis": b, "qubit": q} for b, q in self.bases]
        if self.noise_p is not None:
            payload["noise_p"] = self.noise_p
        if self.b_prime_norm is not None:
            payload["b_prime_norm"] = self.b_prime_norm
        return payload


def apply_depolarizing(state: qsim.StateVector, p: float, qubit: int,
                       rng: np.random.Generator) -> qsim.StateVector:
    """One trajectory-sampled depolarizing event on a qubit.

    With probability p a Pauli drawn uniformly from {X, Y, Z} is applied;
    p = 0 is the identity. Averaging trajectories at p gives
    <Z> = 1 - 4p/3 on |0>.
    """
    if not 0.0 <= p <= 0.5:
        raise qsim.SimulationError("depolarizing probability must be in [0, 0.5]")
    if p == 0.0 or rng.random() >= p:
        return state
    kind = _PAULI_KINDS[int(rng.integers(3))]
    return qsim.apply_gate(state, circ.Gate(kind, (qubit,)))


def _run_with_noise(circuit: circ.Circuit, p: float,
                    rng: np.random.Generator) -> qsim.StateVector:
    state = qsim.StateVector.zero(circuit.n_qubits)
    for gate in circuit.gates:
        state = qsim.apply_gate(state, gate)
        for q in gate.qubits:
            state = apply_depolarizing(state, p, q, rng)
    return state


def _sampled_basis_counts(circuit: circ.Circuit, basis: str, qubit: int,
                          shots: int, seed: int, noise_p: float) -> qsim.Counts:
    rotation = circ.basis_change(basis, qubit)
    if noise_p == 0.0:
        state = qsim.run_statevector(circuit)
        for gate in rotation:
            state = qsim.apply_gate(state, gate)
        return qsim.sample_counts(state, shots, seed)
    # Trajectory sampling: every shot evolves under its own noise draw.
    rng = np.random.default_rng(seed)
    n = circuit.n_qubits
    table: dict[str, int] = {}
    for _ in range(shots):
        state = _run_with_noise(circuit, noise_p, rng)
        for gate in rotation:
            state = qsim.apply_gate(state, gate)
        probs = state.probabilities()
        outcome = int(rng.choice(len(probs), p=probs / probs.sum()))
        key = format(outcome, f"0{n}b")
        table[key] = table.get(key, 0) + 1
    return qsim.Counts(shots, table)


def execute_job(payload: dict) -> dict:
    """Run one job payload; returns the response payload (pure function)."""
    job_id = payload.get("id")
    if not isinstance(job_id, str) or not job_id:
        return {"error": "bad_request", "detail": "missing job id"}

    def fail(code: str, detail: str) -> dict:
        return {"id": job_id, "error": code, "detail": detail}

    try:
        circuit = circ.parse_text(payload["circuit"])
    except KeyError:
        return fail("bad_request", "missing circuit")
    except circ.CircuitSyntaxError as exc:
        return fail("parse_error", str(exc))
    except circ.CircuitError as exc:
        return fail("bad_circuit", str(exc))

    mode = payload.get("mode", "analytic")
    postselect = payload.get("postselect")
    if postselect is not None:
        try:
            postselect = (int(postselect["qubit"]), int(postselect["outcome"]))
        except (KeyError, TypeError, ValueError):
            return fail("bad_request", "postselect needs qubit and outcome")
        if postselect[1] not in (0, 1):
            return fail("bad_request", "postselect outcome must be 0 or 1")
    noise_p = float(payload.get("noise_p", 0.0))
    if not 0.0 <= noise_p <= 0.5:
        return fail("bad_request", "noise_p must be in [0, 0.5]")

    try:
        if mode == "analytic":
            if noise_p:
                return fail("bad_request",
                            "noise is trajectory-sampled; use sampled mode")
            state = qsim.run_statevector(circuit)
            success = 1.0
            if postselect is not None:
                state, success = qsim.postselect(state, *postselect)
            return {
                "id": job_id,
                "amplitudes": [[float(a.real), float(a.imag)]
                               for a in state.amps],
                "success_probability": float(success),
            }
        if mode == "sampled":
            shots = payload.get("shots")
            seed = payload.get("seed")
            if not isinstance(shots, int) or shots < 1:
                return fail("bad_request", "sampled mode needs shots >= 1")
            if not isinstance(seed, int):
                return fail("bad_request", "sampled mode needs an integer seed")
            bases = payload.get("bases") or [{"basis": "Z", "qubit": 0}]
            results = []
            seeds = qsim.basis_seeds(seed, len(bases))
            for spec, child_seed in zip(bases, seeds):
                basis, qubit = spec["basis"], int(spec["qubit"])
                counts = _sampled_basis_counts(circuit, basis, qubit, shots,
                                               child_seed, noise_p)
                kept = counts
                if postselect is not None:
                    kept = qsim.postselect_counts(counts, *postselect)
                results.append({
                    "basis": basis,
                    "qubit": qubit,
                    "counts": dict(sorted(kept.table.items())),
                    "raw_shots": counts.shots,
                    "kept_shots": kept.shots,
                })
            return {"id": job_id, "results": results}
        return fail("bad_request", f"unknown mode {mode!r}")
    except qsim.ZeroProbabilityError as exc:
        return fail("zero_probability", str(exc))
    except (qsim.SimulationError, circ.CircuitError) as exc:
        return fail("execution_error", str(exc))


# ---------------------------------------------------------------------------
# Framing
# ---------------------------------------------------------------------------

def send_frame(sock: socket.socket, payload: dict):
    data = json.dumps(payload, sort_keys=True).encode("utf-8")
    if len(data) > MAX_FRAME_BYTES:
        raise TransportError(f"frame of {len(data)} bytes exceeds the limit")
    sock.sendall(FRAME_HEADER.pack(len(data)) + data)


def _recv_exactly(sock: socket.socket, count: int) -> bytes | None:
    chunks = []
    remaining = count
    while remaining:
        chunk = sock.recv(remaining)
        if not chunk:
            return None
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def recv_frame(sock: socket.socket) -> bytes | None:
    """One frame's payload bytes, or None on a clean EOF."""
    header = _recv_exactly(sock, FRAME_HEADER.size)
    if header is None:
        return None
    (length,) = FRAME_HEADER.unpack(header)
    if length > MAX_FRAME_BYTES:
        raise TransportError(f"peer announced an oversized frame ({length})")
    payload = _recv_exactly(sock, length)
    if payload is None:
        raise TransportError("connection closed mid-frame")
    return payload


# ---------------------------------------------------------------------------
# Server
# ---------------------------------------------------------------------------

@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 0
    timeout: float = DEFAULT_TIMEOUT
    max_concurrent_jobs: int = 32
    job_log_cap: int = 64
    record_payloads: bool = False  # raw request bytes, for protocol tests


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        self.request.settimeout(self.server.config.timeout)
        while True:
            try:
                payload_bytes = recv_frame(self.request)
            except TransportError as exc:
                # frame-level violation: answer, then drop the connection
                # (the stream can no longer be resynchronized)
                try:
                    send_frame(self.request,
                               {"error": "bad_frame", "detail": str(exc)})
                except OSError:
                    pass
                return
            except (socket.timeout, OSError):
                return
            if payload_bytes is None:
                return
            self.server.record(payload_bytes)
            try:
                payload = json.loads(payload_bytes.decode("utf-8"))
                if not isinstance(payload, dict):
                    raise ValueError("payload must be a JSON object")
            except (UnicodeDecodeError, ValueError) as exc:
                response = {"error": "bad_request",
                            "detail": f"undecodable payload: {exc}"}
            else:
                with self.server.job_slots:
                    response = execute_job(payload)
                log.info("job id=%s mode=%s -> %s",
                         payload.get("id"), payload.get("mode"),
                         "error" if "error" in response else "ok")
            try:
                send_frame(self.request, response)
            except OSError:
                return


class _TCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, config: ServerConfig):
        self.config = config
        self.job_slots = threading.BoundedSemaphore(config.max_concurrent_jobs)
        self._records: list[bytes] = []
        self._records_lock = threading.Lock()
        super().__init__((config.host, config.port), _Handler)

    def record(self, payload_bytes: bytes):
        if not self.config.record_payloads:
            return
        with self._records_lock:
            self._records.append(payload_bytes)
            del self._records[:-self.config.job_log_cap]

    @property
    def records(self) -> list[bytes]:
        with self._records_lock:
            return list(self._records)


class ExecutionServer:
    """Lifecycle wrapper: start() in a background thread, or serve_forever()."""

    def __init__(self, config: ServerConfig | None = None):
        self.config = config or ServerConfig()
        self._server = _TCPServer(self.config)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._server.server_address[:2]
        return host, port

    @property
    def records(self) -> list[bytes]:
        return self._server.records

    def start(self) -> tuple[str, int]:
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="qhesolve-server", daemon=True)
        self._thread.start()
        return self.address

    def serve_forever(self):
        log.info("serving on %s:%d", *self.address)
        self._server.serve_forever()

    def shutdown(self):
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def __enter__(self) -> "ExecutionServer":
        self.start()
        return self

    def __exit__(self, *exc):
        self.shutdown()


def _parse_address(server: tuple[str, int] | str) -> tuple[str, int]:
    if isinstance(server, tuple):
        return server
    host, _, port = server.rpartition(":")
    if not host or not port.isdigit():
        raise TransportError(f"bad server address {server!r}; want host:port")
    return host, int(port)


def submit(server: tuple[str, int] | str, job: Job,
           timeout: float = DEFAULT_TIMEOUT) -> dict:
    """Synchronous round trip; raises ServerError on an error payload."""
    address = _parse_address(server)
    try:
        with socket.create_connection(address, timeout=timeout) as sock:
            sock.settimeout(timeout)
            send_frame(sock, job.to_payload())
            payload_bytes = recv_frame(sock)
    except socket.timeout as exc:
        raise TransportError(f"timeout talking to {address}") from exc
    except OSError as exc:
        raise TransportError(f"cannot reach {address}: {exc}") from exc
    if payload_bytes is None:
        raise TransportError("server closed the connection without replying")
    response = json.loads(payload_bytes.decode("utf-8"))
    if "error" in response:
        raise ServerError(response["error"], response.get("detail", ""))
    if response.get("id") != job.id:
        raise TransportError(
            f"response id {response.get('id')!r} does not match {job.id!r}")
    return response
