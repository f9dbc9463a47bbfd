"""Measurement-only gate simulation by repeat-until-success teleportation.

Each trial prepares a fresh ancilla register in a gate-twisted Bell state by
measurement alone, Bell-measures the data qubit(s) against the first half of
the ancilla, and succeeds when the measured index matches the prepared one.
On failure the residual Pauli error is tracked classically and folded into
the gate attempted on the next trial, so a successful trial always leaves
exactly the requested gate applied, up to a global phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from . import measure as msr
from . import qcore
from .pauli import PhasedPauli, SIGMA, cnot_frame_update, nearest_phased_pauli, pauli_product
from .qcore import Label, Projector, QuantumState

__all__ = [
    "BIT_DECODE",
    "GateSpec",
    "PendingGate",
    "ProtocolConfig",
    "TrialRecord",
    "ProtocolTrace",
    "ProtocolError",
    "BudgetExceeded",
    "trials_needed",
    "prepare_ancilla_one",
    "bell_measure",
    "simulate_one_qubit",
    "simulate_cnot",
    "run_circuit",
    "direct_state",
]

#: (x-type bit, z-type bit) -> basis index for the twisted-Bell bases.
BIT_DECODE: dict[tuple[int, int], int] = {(0, 0): 0, (0, 1): 1, (1, 0): 3, (1, 1): 2}

_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=complex,
)

_GATE_MATRICES: dict[str, np.ndarray] = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "T": np.diag([np.exp(-1j * np.pi / 8), np.exp(1j * np.pi / 8)]),
    "X": SIGMA[1],
    "Y": SIGMA[2],
    "Z": SIGMA[3],
    "CNOT": _CNOT,
}

# Canonical internal labels for ancilla registers while they are prepared;
# they are renamed to fresh labels before being tensored into a run.
_PREP1 = ("prep0", "prep1")
_PREP2 = ("prep0", "prep1", "prep2", "prep3")


class ProtocolError(Exception):
    """A protocol-level failure (unsupported gate, inconsistent register)."""


class BudgetExceeded(ProtocolError):
    """A gate ran out of trials; carries the partial traces and final state."""

    def __init__(self, message: str, traces: list["ProtocolTrace"], state: QuantumState, gate_index: int):
        super().__init__(message)
        self.traces = traces
        self.state = state
        self.gate_index = gate_index


@dataclass(frozen=True, eq=False)
class GateSpec:
    """A gate to simulate: one of the named gates or a custom unitary."""

    name: str
    matrix: np.ndarray
    arity: int

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", matrix)
        dim = 2**self.arity
        if self.arity not in (1, 2) or matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {matrix.shape} does not match arity {self.arity}")
        if np.abs(matrix @ matrix.conj().T - np.eye(dim)).max() > qcore.STRUCT_TOL:
            raise ValueError("gate matrix is not unitary")

    @classmethod
    def named(cls, name: str) -> "GateSpec":
        key = name.upper()
        if key not in _GATE_MATRICES:
            raise ValueError(f"unknown gate {name!r} (expected one of {sorted(_GATE_MATRICES)})")
        m = _GATE_MATRICES[key]
        return cls(key, m, 1 if m.shape == (2, 2) else 2)

    @classmethod
    def custom(cls, matrix: np.ndarray) -> "GateSpec":
        matrix = np.asarray(matrix, dtype=complex)
        arity = 1 if matrix.shape == (2, 2) else 2
        return cls("custom", matrix, arity)


def trials_needed(epsilon: float, arity: int) -> int:
    """Smallest trial budget whose overall failure probability is <= epsilon.

    A trial fails with probability 3/4 for one-qubit gates and 15/16 for the
    controlled-NOT, independently per trial.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if arity not in (1, 2):
        raise ValueError(f"arity must be 1 or 2, got {arity!r}")
    fail = 0.75 if arity == 1 else 15.0 / 16.0
    n = max(1, math.ceil(math.log(epsilon) / math.log(fail)))
    while fail**n > epsilon:
        n += 1
    while n > 1 and fail ** (n - 1) <= epsilon:
        n -= 1
    return n


@dataclass(frozen=True)
class ProtocolConfig:
    """Trial budget and preparation mode for protocol runs.

    The budget is either explicit (``max_trials``) or derived per arity from
    the failure budget ``epsilon``.  ``prep_mode`` selects how ancillas are
    prepared: ``"measured"`` runs the preparation measurements on an all-zero
    register, ``"direct"`` draws the index uniformly and writes the state
    vector down (statistically indistinguishable, useful for large runs).
    """

    epsilon: Optional[float] = 1e-9
    max_trials: Optional[int] = None
    prep_mode: str = "measured"
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.prep_mode not in ("measured", "direct"):
            raise ValueError(f"prep_mode must be 'measured' or 'direct', got {self.prep_mode!r}")
        if self.epsilon is None and self.max_trials is None:
            raise ValueError("either epsilon or max_trials must be set")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if self.max_trials is not None and self.max_trials < 1:
            raise ValueError("max_trials must be at least 1")

    def budget(self, arity: int) -> int:
        if self.max_trials is not None:
            return self.max_trials
        return trials_needed(self.epsilon, arity)


@dataclass(frozen=True, eq=False)
class PendingGate:
    """The unitary still owed to the data qubit, one trial at a time.

    After a trial that prepared index j but measured m, the next target is
    target . sigma_m . sigma_j . target^dagger, which undoes the Pauli error
    the failed trial left behind.
    """

    target: np.ndarray
    history: tuple[tuple[int, int], ...] = ()

    def advanced(self, prepared: int, measured: int) -> "PendingGate":
        key = np.ascontiguousarray(self.target).tobytes()
        nxt = _next_target(key, prepared, measured)
        return PendingGate(nxt, self.history + ((prepared, measured),))


@lru_cache(maxsize=2048)
def _next_target(target_bytes: bytes, prepared: int, measured: int) -> np.ndarray:
    t = np.frombuffer(target_bytes, dtype=complex).reshape(2, 2)
    nxt = t @ SIGMA[measured] @ SIGMA[prepared] @ t.conj().T
    pauli = nearest_phased_pauli(nxt)
    if pauli is not None:
        # The catalogue gates close into phased Paulis after at most two
        # trials; snapping keeps the chain exact from then on.
        nxt = pauli.matrix()
    else:
        # The update conjugates by the previous target, so floating-point
        # error would otherwise compound multiplicatively along the chain.
        u, _, vh = np.linalg.svd(nxt)
        nxt = u @ vh
    nxt.setflags(write=False)
    return nxt


@dataclass(frozen=True)
class _PendingTwoQubit:
    """Pending controlled-NOT, or the phased-Pauli pair left after a failure."""

    pair: Optional[tuple[PhasedPauli, PhasedPauli]] = None
    history: tuple[tuple[tuple[int, int], tuple[int, int]], ...] = ()

    @property
    def is_first(self) -> bool:
        return self.pair is None

    def matrix44(self) -> np.ndarray:
        if self.pair is None:
            return _CNOT
        a, b = self.pair
        return np.kron(a.matrix(), b.matrix())

    def advanced(self, prepared: tuple[int, int], measured: tuple[int, int]) -> "_PendingTwoQubit":
        j, k = prepared
        m, n = measured
        alpha, p = pauli_product(m, j)
        beta, q = pauli_product(n, k)
        if self.pair is None:
            gamma, p2, q2 = cnot_frame_update(p, q)
            pair = (PhasedPauli(alpha * beta * gamma, (p2,)), PhasedPauli(1, (q2,)))
        else:
            a, b = self.pair
            pair = (_conjugate_by_axis(a.indices[0], alpha, p), _conjugate_by_axis(b.indices[0], beta, q))
        return _PendingTwoQubit(pair, self.history + ((prepared, measured),))


def _conjugate_by_axis(axis: int, phase: complex, index: int) -> PhasedPauli:
    """sigma_axis (phase * sigma_index) sigma_axis, exactly."""
    p1, mid = pauli_product(axis, index)
    p2, out = pauli_product(mid, axis)
    return PhasedPauli(phase * p1 * p2, (out,))


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """One trial of a protocol run."""

    index: int
    prepared: Union[int, tuple[int, int]]
    outcome: Union[int, tuple[int, int]]
    prep_bits: Optional[tuple[int, ...]]
    bell_bits: tuple[int, ...]
    success: bool
    target: np.ndarray

    def to_dict(self) -> dict:
        as_list = lambda v: list(v) if isinstance(v, tuple) else v
        return {
            "trial": self.index,
            "prepared": as_list(self.prepared),
            "outcome": as_list(self.outcome),
            "prep_bits": list(self.prep_bits) if self.prep_bits is not None else None,
            "bell_bits": list(self.bell_bits),
            "success": self.success,
        }


@dataclass(frozen=True, eq=False)
class ProtocolTrace:
    """Full record of a gate simulation: all trials plus the residual error."""

    trials: tuple[TrialRecord, ...]
    succeeded: bool
    residual_matrix: Optional[np.ndarray] = None
    residual_pauli: Optional[PhasedPauli] = None

    @property
    def total_trials(self) -> int:
        return len(self.trials)

    def to_dict(self) -> dict:
        residual_matrix = None
        if self.residual_matrix is not None and self.residual_pauli is None:
            residual_matrix = [
                [[float(z.real), float(z.imag)] for z in row] for row in self.residual_matrix
            ]
        return {
            "trials": [t.to_dict() for t in self.trials],
            "total_trials": self.total_trials,
            "succeeded": self.succeeded,
            "residual": str(self.residual_pauli) if self.residual_pauli is not None else None,
            "residual_matrix": residual_matrix,
        }


def _fresh_labels(existing: Sequence[Label], count: int) -> tuple[str, ...]:
    used = set(existing)
    out: list[str] = []
    i = 0
    while len(out) < count:
        cand = f"a{i}"
        if cand not in used:
            out.append(cand)
            used.add(cand)
        i += 1
    return tuple(out)


@lru_cache(maxsize=512)
def _one_qubit_prep_instruments(target_bytes: bytes):
    target = np.frombuffer(target_bytes, dtype=complex).reshape(2, 2)
    mx = msr.expand_f_separate(msr.solve_two_qubit_parity_form(1, target, targets=_PREP1))
    mz = msr.expand_f_separate(msr.solve_two_qubit_parity_form(3, target, targets=_PREP1))
    return (mx.slots(), mz.slots())


@lru_cache(maxsize=512)
def _one_qubit_ancilla(target_bytes: bytes, j: int) -> QuantumState:
    target = np.frombuffer(target_bytes, dtype=complex).reshape(2, 2)
    state = qcore.epr_state(_PREP1)
    return qcore.apply_unitary(state, target @ SIGMA[j], (_PREP1[1],))


def _prepare_one(
    target: np.ndarray,
    mode: str,
    rng: np.random.Generator,
) -> tuple[int, QuantumState, Optional[tuple[int, int]]]:
    """Prepare a two-qubit ancilla (canonical labels) in a target-twisted Bell state."""
    key = np.ascontiguousarray(target).tobytes()
    if mode == "measured":
        instruments = _one_qubit_prep_instruments(key)
        state = qcore.zero_state(_PREP1)
        a, state, _ = qcore.measure(state, instruments[0], rng, check=False)
        b, state, _ = qcore.measure(state, instruments[1], rng, check=False)
        return BIT_DECODE[(a, b)], state, (a, b)
    if mode == "direct":
        j = int(rng.integers(0, 4))
        return j, _one_qubit_ancilla(key, j), None
    raise ValueError(f"unknown preparation mode {mode!r}")


def prepare_ancilla_one(
    u: np.ndarray,
    mode: str,
    rng: np.random.Generator,
    labels: tuple[Label, Label] = ("anc0", "anc1"),
) -> tuple[QuantumState, int]:
    """Prepare two fresh qubits in one of the four u-twisted Bell states.

    In ``"measured"`` mode the pair starts in |00> and is collapsed by the
    two commuting parity-form binaries for ``u``; the returned index is
    decoded from their bits, and cannot be chosen in advance.  In
    ``"direct"`` mode the index is drawn uniformly and the state is written
    down directly.  Returns (state, index).
    """
    j, state, _bits = _prepare_one(np.asarray(u, dtype=complex), mode, rng)
    return qcore.relabel(state, dict(zip(_PREP1, labels))), j


@lru_cache(maxsize=1)
def _cnot_prep_instruments():
    binaries = msr.cnot_measurement_set(labels=_PREP2)
    out = []
    for m in binaries:
        p0 = Projector(qcore.embed(m.p0.matrix, m.labels, _PREP2), _PREP2)
        p1 = Projector(qcore.embed(m.p1.matrix, m.labels, _PREP2), _PREP2)
        out.append((p0, p1))
    return tuple(out)


@lru_cache(maxsize=512)
def _two_qubit_ancilla(matrix_bytes: bytes, j: int, k: int) -> QuantumState:
    u = np.frombuffer(matrix_bytes, dtype=complex).reshape(4, 4)
    base = qcore.tensor(qcore.epr_state((_PREP2[0], _PREP2[2])), qcore.epr_state((_PREP2[1], _PREP2[3])))
    state = qcore.apply_unitary(base, u @ np.kron(SIGMA[j], SIGMA[k]), (_PREP2[2], _PREP2[3]))
    return qcore.permute_to(state, _PREP2)


def _prepare_two(
    pending: _PendingTwoQubit,
    mode: str,
    rng: np.random.Generator,
) -> tuple[tuple[int, int], QuantumState, Optional[tuple[int, ...]]]:
    """Prepare the four-qubit ancilla register (canonical labels)."""
    if mode == "direct":
        j, k = (int(x) for x in rng.integers(0, 4, size=2))
        key = np.ascontiguousarray(pending.matrix44()).tobytes()
        return (j, k), _two_qubit_ancilla(key, j, k), None
    if mode != "measured":
        raise ValueError(f"unknown preparation mode {mode!r}")
    if pending.is_first:
        state = qcore.zero_state(_PREP2)
        bits = []
        for pair in _cnot_prep_instruments():
            b, state, _ = qcore.measure(state, pair, rng, check=False)
            bits.append(b)
        j = BIT_DECODE[(bits[0], bits[1])]
        k = BIT_DECODE[(bits[2], bits[3])]
        return (j, k), state, tuple(bits)
    # After the first failure the pending gate factors, so the two ancilla
    # pairs are prepared independently by (possibly negated) Bell binaries.
    a, b = pending.pair
    j, state_a, bits_a = _prepare_one(a.matrix(), "measured", rng)
    k, state_b, bits_b = _prepare_one(b.matrix(), "measured", rng)
    state_a = qcore.relabel(state_a, dict(zip(_PREP1, (_PREP2[0], _PREP2[2]))))
    state_b = qcore.relabel(state_b, dict(zip(_PREP1, (_PREP2[1], _PREP2[3]))))
    return (j, k), qcore.tensor(state_a, state_b), bits_a + bits_b


#: The four Bell state vectors in slot order, fixed once for factoring.
_BELL_VECTORS = tuple(qcore.bell_state(i).data for i in range(4))


@lru_cache(maxsize=128)
def _bell_instruments_at(n: int, pos_a: int, pos_b: int, negate_x: bool, negate_z: bool):
    sx = -1.0 if negate_x else 1.0
    sz = -1.0 if negate_z else 1.0
    eye4 = np.eye(4, dtype=complex)
    xx = (eye4 + sx * np.kron(SIGMA[1], SIGMA[1])) / 2
    zz = (eye4 + sz * np.kron(SIGMA[3], SIGMA[3])) / 2
    out = []
    for local in (xx, zz):
        p0 = qcore.embed_at(local, (pos_a, pos_b), n)
        p1 = np.eye(2**n, dtype=complex) - p0
        p0.setflags(write=False)
        p1.setflags(write=False)
        out.append((p0, p1))
    return tuple(out)


def _bell_measure_bits(
    state: QuantumState,
    pair: tuple[Label, Label],
    rng: np.random.Generator,
    variant: tuple[int, int] = (0, 0),
) -> tuple[int, QuantumState, tuple[int, int]]:
    qa, qb = pair
    if qa == qb:
        raise ValueError("Bell measurement needs two distinct qubits")
    pos = (state.position(qa), state.position(qb))
    instruments = _bell_instruments_at(state.n, pos[0], pos[1], bool(variant[0]), bool(variant[1]))
    labels = state.labels
    a, state, _ = qcore.measure(
        state, (Projector(instruments[0][0], labels), Projector(instruments[0][1], labels)), rng, check=False
    )
    b, state, _ = qcore.measure(
        state, (Projector(instruments[1][0], labels), Projector(instruments[1][1], labels)), rng, check=False
    )
    m = BIT_DECODE[(a, b)]
    basis_index = BIT_DECODE[(a ^ variant[0], b ^ variant[1])]
    post = qcore.factor_out(state, (qa, qb), _BELL_VECTORS[basis_index])
    return m, post, (a, b)


def bell_measure(
    state: QuantumState,
    pair: tuple[Label, Label],
    rng: np.random.Generator,
    variant: tuple[int, int] = (0, 0),
) -> tuple[int, QuantumState]:
    """Bell-measure two labelled qubits and drop them from the register.

    The measurement is performed as two commuting parity-form binaries (x
    axis then z axis).  ``variant`` optionally negates the second input bit
    of either binary, which relabels the outcomes of the same four Bell
    projectors: with variant (0, 0) outcome m projects onto Bell state m,
    and the negated variants report the prepared index of the corresponding
    Pauli-gate ancilla instead.  Returns (outcome, remaining state).
    """
    if variant[0] not in (0, 1) or variant[1] not in (0, 1):
        raise ValueError("variant must be a pair of bits")
    m, post, _bits = _bell_measure_bits(state, pair, rng, variant)
    return m, post


def simulate_one_qubit(
    gate: GateSpec,
    state: QuantumState,
    qubit: Label,
    cfg: ProtocolConfig,
    rng: np.random.Generator,
) -> tuple[QuantumState, ProtocolTrace]:
    """Apply a one-qubit gate to one qubit of a register, by measurements only.

    Returns the new register (same labels and order as the input; the
    surviving ancilla qubit is relabelled back to ``qubit``) and the trial
    trace.  When the trial budget runs out the trace reports the residual
    gate still owed, canonicalised to a phased Pauli whenever it is one.
    """
    if gate.arity != 1:
        raise ValueError("expected a one-qubit gate")
    original = state.labels
    state.position(qubit)
    pending = PendingGate(gate.matrix)
    trials: list[TrialRecord] = []
    data_label: Label = qubit
    succeeded = False
    budget = cfg.budget(1)
    for r in range(1, budget + 1):
        la, lb = _fresh_labels(state.labels, 2)
        j, ancilla, prep_bits = _prepare_one(pending.target, cfg.prep_mode, rng)
        ancilla = qcore.relabel(ancilla, dict(zip(_PREP1, (la, lb))))
        merged = qcore.tensor(state, ancilla)
        m, state, bell_bits = _bell_measure_bits(merged, (data_label, la), rng)
        success = m == j
        trials.append(
            TrialRecord(
                index=r,
                prepared=j,
                outcome=m,
                prep_bits=prep_bits,
                bell_bits=bell_bits,
                success=success,
                target=pending.target,
            )
        )
        data_label = lb
        if success:
            succeeded = True
            break
        pending = pending.advanced(j, m)
    state = qcore.relabel(state, {data_label: qubit})
    state = qcore.permute_to(state, original)
    if succeeded:
        trace = ProtocolTrace(tuple(trials), True)
    else:
        trace = ProtocolTrace(
            tuple(trials),
            False,
            residual_matrix=pending.target,
            residual_pauli=nearest_phased_pauli(pending.target),
        )
    return state, trace


def simulate_cnot(
    state: QuantumState,
    qubits: tuple[Label, Label],
    cfg: ProtocolConfig,
    rng: np.random.Generator,
) -> tuple[QuantumState, ProtocolTrace]:
    """Apply a controlled-NOT (first label controls) by measurements only.

    The first trial prepares four ancilla qubits with the four-measurement
    set; failed trials reduce the pending gate to a tensor product of phased
    Paulis, so every later trial needs only (possibly negated) Bell binaries
    on the two ancilla pairs independently.
    """
    qc, qt = qubits
    if qc == qt:
        raise ValueError("controlled-NOT needs two distinct qubits")
    original = state.labels
    state.position(qc)
    state.position(qt)
    pending = _PendingTwoQubit()
    trials: list[TrialRecord] = []
    cur_c: Label = qc
    cur_t: Label = qt
    succeeded = False
    budget = cfg.budget(2)
    for r in range(1, budget + 1):
        c1, c2, c3, c4 = _fresh_labels(state.labels, 4)
        (j, k), ancilla, prep_bits = _prepare_two(pending, cfg.prep_mode, rng)
        ancilla = qcore.relabel(ancilla, dict(zip(_PREP2, (c1, c2, c3, c4))))
        merged = qcore.tensor(state, ancilla)
        m, merged, bits_m = _bell_measure_bits(merged, (cur_c, c1), rng)
        n, merged, bits_n = _bell_measure_bits(merged, (cur_t, c2), rng)
        success = (m, n) == (j, k)
        trials.append(
            TrialRecord(
                index=r,
                prepared=(j, k),
                outcome=(m, n),
                prep_bits=prep_bits,
                bell_bits=bits_m + bits_n,
                success=success,
                target=pending.matrix44(),
            )
        )
        state = merged
        cur_c, cur_t = c3, c4
        if success:
            succeeded = True
            break
        pending = pending.advanced((j, k), (m, n))
    state = qcore.relabel(state, {cur_c: qc, cur_t: qt})
    state = qcore.permute_to(state, original)
    if succeeded:
        trace = ProtocolTrace(tuple(trials), True)
    else:
        residual = pending.matrix44()
        pauli = None
        if pending.pair is not None:
            a, b = pending.pair
            pauli = PhasedPauli(a.phase * b.phase, (a.indices[0], b.indices[0]))
        trace = ProtocolTrace(tuple(trials), False, residual_matrix=residual, residual_pauli=pauli)
    return state, trace


def run_circuit(
    circuit: Sequence[tuple[GateSpec, tuple[Label, ...]]],
    n_qubits: int,
    cfg: ProtocolConfig,
    rng: np.random.Generator,
) -> tuple[QuantumState, list[ProtocolTrace], list[Label]]:
    """Execute a circuit on an all-zero register, measurement-only.

    The logical register keeps labels 0..n-1 throughout (teleported qubits
    are spliced back in under their old labels).  Raises BudgetExceeded with
    the partial traces if any gate exhausts its trial budget.
    """
    if not 1 <= n_qubits <= 4:
        raise ValueError("the logical register holds between 1 and 4 qubits")
    state = qcore.zero_state(tuple(range(n_qubits)))
    traces: list[ProtocolTrace] = []
    for idx, (gate, labels) in enumerate(circuit):
        if gate.arity == 1:
            state, trace = simulate_one_qubit(gate, state, labels[0], cfg, rng)
        elif gate.name == "CNOT":
            state, trace = simulate_cnot(state, (labels[0], labels[1]), cfg, rng)
        else:
            raise ProtocolError("two-qubit teleportation is implemented for the controlled-NOT only")
        traces.append(trace)
        if not trace.succeeded:
            raise BudgetExceeded(
                f"gate {idx} ({gate.name}) exhausted its trial budget",
                traces,
                state,
                idx,
            )
    return state, traces, list(range(n_qubits))


def direct_state(
    circuit: Sequence[tuple[GateSpec, tuple[Label, ...]]],
    n_qubits: int,
) -> QuantumState:
    """Reference result of the same circuit applied as plain unitaries."""
    state = qcore.zero_state(tuple(range(n_qubits)))
    for gate, labels in circuit:
        state = qcore.apply_unitary(state, gate.matrix, labels)
    return state
