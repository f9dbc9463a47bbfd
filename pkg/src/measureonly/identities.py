"""Named verification checks for the whole measurement catalogue.

Every algebraic fact the construction rests on is spelled out here as a
named check carrying its observed deviation and tolerance: the sixteen
single-qubit Pauli products, the Bell projector expansions and pair sums,
the Hadamard and pi/8 conjugation tables (two levels deep), the sixteen
controlled-NOT conjugations, the three-qubit parity forms of the
controlled-NOT preparation, the x/z pair equivalences for the catalogue
gates, and the commutation plus composition of the four-measurement set.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import measure as msr
from . import qcore
from .measure import GAMMA
from .pauli import SIGMA, pauli_product, cnot_frame_update
from .protocol import _GATE_MATRICES

__all__ = ["CheckResult", "identity_checks", "EXACT_TOL", "EQUIV_TOL"]

#: Tolerance for machine-exact identities.
EXACT_TOL = 1e-12
#: Tolerance for set equalities between independently built measurements.
EQUIV_TOL = 1e-10

# Signs of (XX, YY, ZZ) in the expansion of each Bell projector,
# |B_j><B_j| = (I + s1 XX + s2 YY + s3 ZZ) / 4.
_BELL_EXPANSION_SIGNS = {
    0: (1, -1, 1),
    1: (1, 1, -1),
    2: (-1, -1, -1),
    3: (-1, 1, 1),
}

# Hadamard conjugation: axis j -> (sign, axis).
_HADAMARD_TABLE = {1: (1, 3), 2: (-1, 2), 3: (1, 1)}

_EXP = np.exp
_T1 = np.array([[0, _EXP(-1j * np.pi / 4)], [_EXP(1j * np.pi / 4), 0]], dtype=complex)
_T2 = np.array([[0, -1j * _EXP(-1j * np.pi / 4)], [1j * _EXP(1j * np.pi / 4), 0]], dtype=complex)

# pi/8-gate conjugation: axis j -> dense expected conjugate.
_T_TABLE = {1: _T1, 2: _T2, 3: SIGMA[3]}

# Second-level pi/8 chain: (first axis, second axis) -> (sign, axis).
_T_CHAIN_TABLE = {
    (1, 1): (1, 2),
    (1, 2): (1, 1),
    (1, 3): (-1, 3),
    (2, 1): (-1, 2),
    (2, 2): (-1, 1),
    (2, 3): (-1, 3),
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


def _dev(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


def identity_checks(
    tolerance: Optional[float] = None,
    gamma: Optional[Sequence[float]] = None,
) -> list[CheckResult]:
    """Run every verification check; returns one result per named identity.

    ``tolerance`` overrides each check's own tolerance when given; ``gamma``
    overrides the pair-sum sign vector (negative-control hook for tests).
    """
    if gamma is None:
        gamma = GAMMA
    checks: list[CheckResult] = []

    def add(name: str, deviation: float, tol: float) -> None:
        checks.append(CheckResult(name, float(deviation), tolerance if tolerance is not None else tol))

    # Single-qubit Pauli products.
    for i in range(4):
        for j in range(4):
            phase, k = pauli_product(i, j)
            add(f"pauli product ({i},{j})", _dev(SIGMA[i] @ SIGMA[j], phase * SIGMA[k]), EXACT_TOL)

    # Bell projector expansions in the two-qubit Pauli basis.
    pair = [np.kron(SIGMA[a], SIGMA[a]) for a in (1, 2, 3)]
    eye4 = np.eye(4, dtype=complex)
    bell_projs = []
    for j in range(4):
        v = qcore.bell_state(j).data
        bell_projs.append(np.outer(v, v.conj()))
        s1, s2, s3 = _BELL_EXPANSION_SIGNS[j]
        expected = (eye4 + s1 * pair[0] + s2 * pair[1] + s3 * pair[2]) / 4
        add(f"bell projector expansion (B{j})", _dev(bell_projs[j], expected), EXACT_TOL)

    # Pair sums: projector 0 plus projector i is a half-rank parity projector.
    for i in (1, 2, 3):
        expected = (eye4 + gamma[i] * pair[i - 1]) / 2
        add(f"bell pair sum (i={i})", _dev(bell_projs[0] + bell_projs[i], expected), EXACT_TOL)

    # Hadamard conjugation table.
    h = _GATE_MATRICES["H"]
    for j, (sign, out) in _HADAMARD_TABLE.items():
        add(f"hadamard conjugation (sigma_{j})", _dev(h @ SIGMA[j] @ h.conj().T, sign * SIGMA[out]), EXACT_TOL)

    # pi/8-gate conjugation table, first and second level.
    t = _GATE_MATRICES["T"]
    for j, expected in _T_TABLE.items():
        add(f"t conjugation (sigma_{j})", _dev(t @ SIGMA[j] @ t.conj().T, expected), EXACT_TOL)
    for (a, k), (sign, out) in _T_CHAIN_TABLE.items():
        ta = _T_TABLE[a]
        add(f"t chain ({a},{k})", _dev(ta @ SIGMA[k] @ ta.conj().T, sign * SIGMA[out]), EXACT_TOL)

    # Controlled-NOT conjugation table, all sixteen rows.
    cnot = _GATE_MATRICES["CNOT"]
    for j in range(4):
        for k in range(4):
            phase, jj, kk = cnot_frame_update(j, k)
            lhs = cnot @ np.kron(SIGMA[j], SIGMA[k]) @ cnot
            add(f"cnot conjugation ({j},{k})", _dev(lhs, phase * np.kron(SIGMA[jj], SIGMA[kk])), EXACT_TOL)

    # Controlled-NOT preparation: the two three-qubit parity forms, built by
    # summing the corresponding rank-one basis projectors.
    labels = (1, 2, 3, 4)
    basis16 = msr.two_qubit_u_basis_measurement(cnot, labels)
    sum_j01 = sum(basis16.projectors[4 * j + k].matrix for j in (0, 1) for k in range(4))
    xxx = (np.eye(8, dtype=complex) + np.kron(np.kron(SIGMA[1], SIGMA[1]), SIGMA[1])) / 2
    add("cnot prep x-parity (1,3,4)", _dev(sum_j01, qcore.embed(xxx, (1, 3, 4), labels)), EXACT_TOL)
    sum_k03 = sum(basis16.projectors[4 * j + k].matrix for j in range(4) for k in (0, 3))
    zzz = (np.eye(8, dtype=complex) + np.kron(np.kron(SIGMA[3], SIGMA[3]), SIGMA[3])) / 2
    add("cnot prep z-parity (2,3,4)", _dev(sum_k03, qcore.embed(zzz, (2, 3, 4), labels)), EXACT_TOL)

    # x/z pair equivalence for the catalogue gates: the joint projectors of
    # the two parity-form binaries equal the rank-one basis projectors.
    catalogue = [("I", np.eye(2, dtype=complex))] + [
        (name, _GATE_MATRICES[name]) for name in ("H", "T", "X", "Y", "Z")
    ]
    for name, u in catalogue:
        joint = msr.compose_binaries(msr.u_basis_binary_pair(u))
        _, dev = msr.match_projector_sets(joint.projectors, msr.u_basis_measurement(u).projectors)
        add(f"xz pair equivalence ({name})", dev, EQUIV_TOL)

    # The four-measurement set: pairwise commutation and composition into
    # the 16-outcome basis measurement.
    binaries = msr.cnot_measurement_set(labels)
    embedded = [qcore.embed(m.p0.matrix, m.labels, labels) for m in binaries]
    for a in range(4):
        for b in range(a + 1, 4):
            comm = np.abs(embedded[a] @ embedded[b] - embedded[b] @ embedded[a]).max()
            add(f"cnot binaries commute ({a},{b})", comm, EQUIV_TOL)
    joint16 = msr.compose_binaries(binaries, system=labels)
    _, dev = msr.match_projector_sets(joint16.projectors, basis16.projectors)
    add("cnot binaries compose to 16-outcome basis", dev, EQUIV_TOL)

    return checks
