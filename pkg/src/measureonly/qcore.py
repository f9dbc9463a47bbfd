"""Dense linear algebra on labelled qubit registers.

States carry an ordered tuple of distinct qubit labels; the first label is
the most significant bit of the basis index.  Everything here is a value:
operations return new states and never mutate their inputs, so independent
protocol runs can share nothing but code.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .pauli import SIGMA

Label = Hashable

#: Tolerance for structural checks (normalisation, projector algebra).
STRUCT_TOL = 1e-10

__all__ = [
    "Label",
    "STRUCT_TOL",
    "QuantumState",
    "Projector",
    "zero_state",
    "epr_state",
    "bell_state",
    "embed",
    "embed_at",
    "apply_unitary",
    "measure",
    "fidelity_up_to_phase",
    "tensor",
    "permute_to",
    "relabel",
    "factor_out",
]


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure state vector or density matrix on up to eight labelled qubits."""

    data: np.ndarray
    labels: tuple[Label, ...]
    kind: str = "pure"

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate qubit labels")
        if len(labels) > 8:
            raise ValueError("at most 8 qubits are supported")
        dim = 2 ** len(labels)
        data = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "data", data)
        if self.kind == "pure":
            if data.shape != (dim,):
                raise ValueError(f"expected a vector of length {dim}, got shape {data.shape}")
            norm = float(np.sqrt(np.vdot(data, data).real))
            if abs(norm - 1.0) > STRUCT_TOL:
                raise ValueError(f"state vector norm {norm} is not 1")
        elif self.kind == "mixed":
            if data.shape != (dim, dim):
                raise ValueError(f"expected a {dim}x{dim} matrix, got shape {data.shape}")
            if np.abs(data - data.conj().T).max() > STRUCT_TOL:
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(data)
            if abs(tr - 1.0) > STRUCT_TOL:
                raise ValueError(f"density matrix trace {tr} is not 1")
            if np.linalg.eigvalsh(data).min() < -STRUCT_TOL:
                raise ValueError("density matrix is not positive semidefinite")
        else:
            raise ValueError(f"kind must be 'pure' or 'mixed', got {self.kind!r}")

    @classmethod
    def pure(cls, vector: np.ndarray, labels: Sequence[Label]) -> "QuantumState":
        return cls(np.asarray(vector, dtype=complex), tuple(labels), "pure")

    @classmethod
    def mixed(cls, rho: np.ndarray, labels: Sequence[Label]) -> "QuantumState":
        return cls(np.asarray(rho, dtype=complex), tuple(labels), "mixed")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    def position(self, label: Label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown qubit label {label!r}") from None

    def to_density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data


@dataclass(frozen=True, eq=False)
class Projector:
    """A projection operator supported on an ordered set of labelled qubits."""

    matrix: np.ndarray
    labels: tuple[Label, ...]

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        matrix = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", matrix)
        dim = 2 ** len(labels)
        if matrix.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got shape {matrix.shape}")

    def validate(self, tol: float = STRUCT_TOL) -> None:
        m = self.matrix
        if np.abs(m - m.conj().T).max() > tol:
            raise ValueError("projector is not Hermitian")
        if np.abs(m @ m - m).max() > tol:
            raise ValueError("projector is not idempotent")

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))


def zero_state(labels: Sequence[Label]) -> QuantumState:
    """The all-|0> register on the given labels."""
    v = np.zeros(2 ** len(tuple(labels)), dtype=complex)
    v[0] = 1.0
    return QuantumState.pure(v, labels)


def epr_state(labels: Sequence[Label] = (0, 1)) -> QuantumState:
    """The maximally entangled pair (|00> + |11>) / sqrt(2)."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1 / np.sqrt(2)
    return QuantumState.pure(v, labels)


def bell_state(i: int, labels: Sequence[Label] = (0, 1)) -> QuantumState:
    """Bell state number i: the second-qubit Pauli sigma_i applied to the EPR pair."""
    if i not in (0, 1, 2, 3):
        raise ValueError(f"Bell index must be one of 0, 1, 2, 3, got {i!r}")
    labels = tuple(labels)
    return apply_unitary(epr_state(labels), SIGMA[i], (labels[1],))


def embed_at(op: np.ndarray, positions: Sequence[int], n: int) -> np.ndarray:
    """Embed ``op`` so it acts on the given axis positions of an n-qubit register."""
    positions = tuple(positions)
    k = len(positions)
    op = np.asarray(op, dtype=complex)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} position(s)")
    if len(set(positions)) != k or any(not 0 <= p < n for p in positions):
        raise ValueError(f"invalid positions {positions!r} for {n} qubits")
    full = np.kron(op, np.eye(2 ** (n - k), dtype=complex))
    # Tensor axes of `full` are ordered (positions..., rest...); route each to
    # its place in the register.
    src = list(positions) + [p for p in range(n) if p not in positions]
    perm = np.argsort(src)
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(tuple(perm) + tuple(perm + n))
    return t.reshape(2**n, 2**n)


def embed(op: np.ndarray, on: Sequence[Label], system: Sequence[Label]) -> np.ndarray:
    """Operator acting as ``op`` on the ``on`` qubits and as identity elsewhere.

    Embedding respects label order and commutes with composition: embedding
    A then B on disjoint labels equals embedding A (x) B on the union.
    """
    system = tuple(system)
    on = tuple(on)
    if len(set(on)) != len(on):
        raise ValueError(f"duplicate label in {on!r}")
    missing = [q for q in on if q not in system]
    if missing:
        raise ValueError(f"unknown qubit label(s) {missing!r}")
    return embed_at(op, tuple(system.index(q) for q in on), len(system))


def apply_unitary(state: QuantumState, op: np.ndarray, on: Sequence[Label]) -> QuantumState:
    """Apply a unitary to the given qubits of a state."""
    full = embed(op, on, state.labels)
    if state.is_pure:
        return QuantumState.pure(full @ state.data, state.labels)
    return QuantumState.mixed(full @ state.data @ full.conj().T, state.labels)


def _instrument_matrices(state: QuantumState, instrument: Sequence[Projector]) -> list[np.ndarray]:
    projs = list(instrument)
    if not projs:
        raise ValueError("empty instrument")
    base = projs[0].labels
    for p in projs:
        if p.labels != base:
            raise ValueError("instrument projectors must share one label tuple")
    if base == state.labels:
        return [p.matrix for p in projs]
    return [embed(p.matrix, base, state.labels) for p in projs]


def measure(
    state: QuantumState,
    instrument: Sequence[Projector],
    rng: np.random.Generator,
    *,
    check: bool = True,
) -> tuple[int, QuantumState, float]:
    """Sample a projective-measurement outcome and collapse the state.

    Parameters
    ----------
    state:
        The register to measure.
    instrument:
        Mutually annihilating projectors summing to the identity, all on the
        same label tuple (a subset of the state's labels; they are embedded
        automatically).
    rng:
        Explicit random stream; outcome ``i`` is drawn with probability
        tr(P_i rho).
    check:
        When true, validate the instrument (idempotency, Hermiticity, mutual
        annihilation, completeness) before sampling.

    Returns
    -------
    (outcome, post, prob):
        The sampled outcome index, the collapsed state P_i rho P_i / p_i
        (or the renormalised P_i |psi> for pure states), and p_i.
    """
    mats = _instrument_matrices(state, instrument)
    dim = state.dim
    if check:
        for p in instrument:
            p.validate()
        total = sum(mats)
        if np.abs(total - np.eye(dim)).max() > STRUCT_TOL:
            raise ValueError("incomplete instrument: projectors do not sum to the identity")
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                overlap = np.abs(mats[i] @ mats[j]).max()
                if overlap > STRUCT_TOL:
                    raise ValueError(
                        f"projectors {i} and {j} are not mutually annihilating "
                        f"(max overlap {overlap:.3e})"
                    )
    if state.is_pure:
        shots = [m @ state.data for m in mats]
        probs = [float(np.vdot(v, v).real) for v in shots]
    else:
        shots = None
        probs = [float(np.trace(m @ state.data).real) for m in mats]
    total_p = sum(probs)
    if total_p < STRUCT_TOL:
        raise ValueError("degenerate state: all outcome probabilities vanish")
    r = rng.random() * total_p
    outcome = 0
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        outcome = i
        if r < acc:
            break
    prob = probs[outcome]
    if prob <= 0.0:
        # numerically possible only when r lands beyond the last positive bin
        outcome = int(np.argmax(probs))
        prob = probs[outcome]
    if state.is_pure:
        post = QuantumState.pure(shots[outcome] / np.sqrt(prob), state.labels)
    else:
        m = mats[outcome]
        post = QuantumState.mixed(m @ state.data @ m / prob, state.labels)
    return outcome, post, prob


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity_up_to_phase(a: QuantumState, b: QuantumState) -> float:
    """Fidelity between two states on the same labels, blind to global phase.

    For pure states this is |<a|b>|^2; if either argument is a density matrix
    the Uhlmann fidelity is used.
    """
    if set(a.labels) != set(b.labels) or a.n != b.n:
        raise ValueError(f"label mismatch: {a.labels!r} vs {b.labels!r}")
    b = permute_to(b, a.labels)
    if a.is_pure and b.is_pure:
        f = float(abs(np.vdot(a.data, b.data)) ** 2)
    else:
        s = _psd_sqrt(a.to_density())
        f = float(np.trace(_psd_sqrt(s @ b.to_density() @ s)).real ** 2)
    return min(max(f, 0.0), 1.0)


def tensor(a: QuantumState, b: QuantumState) -> QuantumState:
    """Tensor product of two registers with disjoint labels."""
    if set(a.labels) & set(b.labels):
        raise ValueError("tensor factors must have disjoint labels")
    labels = a.labels + b.labels
    if a.is_pure and b.is_pure:
        return QuantumState.pure(np.multiply.outer(a.data, b.data).reshape(-1), labels)
    return QuantumState.mixed(np.kron(a.to_density(), b.to_density()), labels)


def permute_to(state: QuantumState, new_labels: Sequence[Label]) -> QuantumState:
    """Reorder the qubit axes of a state to the given label order."""
    new = tuple(new_labels)
    if new == state.labels:
        return state
    if set(new) != set(state.labels) or len(new) != state.n:
        raise ValueError(f"label mismatch: {new!r} is not a permutation of {state.labels!r}")
    perm = [state.labels.index(q) for q in new]
    n = state.n
    if state.is_pure:
        data = state.data.reshape((2,) * n).transpose(perm).reshape(-1)
        return QuantumState.pure(data, new)
    axes = perm + [p + n for p in perm]
    data = state.data.reshape((2,) * (2 * n)).transpose(axes).reshape(state.dim, state.dim)
    return QuantumState.mixed(data, new)


def relabel(state: QuantumState, mapping: dict[Label, Label]) -> QuantumState:
    """Rename qubit labels in place (order and data unchanged)."""
    new = tuple(mapping.get(q, q) for q in state.labels)
    return QuantumState(state.data, new, state.kind)


def factor_out(
    state: QuantumState,
    on: Sequence[Label],
    vec: np.ndarray,
    *,
    tol: float = 1e-8,
) -> QuantumState:
    """Remove the ``on`` qubits by contracting them against a fixed pure state.

    The register must actually factor as ``vec`` on the ``on`` qubits times a
    remainder (as it does right after a nondegenerate projective measurement);
    otherwise a ValueError is raised.  ``vec`` is given in the order of
    ``on``.  Factoring out every qubit leaves a zero-qubit state.
    """
    on = tuple(on)
    k = len(on)
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if vec.shape != (2**k,):
        raise ValueError(f"expected a vector of length {2 ** k}")
    rest = tuple(q for q in state.labels if q not in on)
    if len(rest) + k != state.n:
        raise ValueError(f"labels {on!r} are not all present")
    reordered = permute_to(state, on + rest)
    if state.is_pure:
        t = reordered.data.reshape(2**k, -1)
        out = vec.conj() @ t
        w = np.linalg.norm(out)
        if abs(w - 1.0) > tol:
            raise ValueError(f"register does not factor through the given state (weight {w**2:.6f})")
        return QuantumState.pure(out / w, rest)
    r = reordered.data.reshape(2**k, 2 ** (state.n - k), 2**k, 2 ** (state.n - k))
    out = np.einsum("a,abcd,c->bd", vec.conj(), r, vec)
    w = float(np.trace(out).real)
    if abs(w - 1.0) > tol:
        raise ValueError(f"register does not factor through the given state (weight {w:.6f})")
    return QuantumState.mixed(out / w, rest)
