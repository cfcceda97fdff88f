"""Qubit-level entanglement of symmetric N-qubit states.

The one- and two-qubit reduced density matrices of a permutation-symmetric
state are fixed by the collective moments <J_a> and <J_a J_b + J_b J_a>:

    <sigma_a>             = 2 <J_a> / N
    <sigma_1a sigma_2b>   = (2 <J_a J_b + J_b J_a> - N delta_ab) / (N (N - 1))

so no 2^N embedding is needed. Single-qubit |0> is spin up along z.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NTooSmall
from .spin import SpinSystem, build_j_operators

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)
_I2 = np.eye(2, dtype=complex)
RANK_TOL = 1e-13
_YY = np.kron(PAULI[1], PAULI[1])
_PAIR_BASIS = np.array([[np.kron(PAULI[a], PAULI[b]) for b in range(3)] for a in range(3)])
_LOCAL_BASIS = np.array([np.kron(PAULI[a], _I2) + np.kron(_I2, PAULI[a]) for a in range(3)])


@dataclass(frozen=True)
class EntanglementReport:
    Q: float
    negativity: float
    concurrence: float
    eof: float


def _moments(states: np.ndarray, sys: SpinSystem):
    """First moments (..., 3) and symmetrized second moments (..., 3, 3).

    `states` has the basis on its first axis; extra axes are batch axes.
    """
    ops = build_j_operators(sys)
    applied = [op @ states for op in ops]
    first = np.stack([np.einsum("i...,i...->...", states.conj(), a).real for a in applied], axis=-1)
    second = np.empty(first.shape + (3,))
    for a in range(3):
        for b in range(a, 3):
            # <J_a J_b + J_b J_a> = 2 Re <J_a psi | J_b psi>
            val = 2 * np.einsum("i...,i...->...", applied[a].conj(), applied[b]).real
            second[..., a, b] = val
            second[..., b, a] = val
    return first, second


def collective_moments(state: np.ndarray, sys: SpinSystem) -> tuple[np.ndarray, np.ndarray]:
    return _moments(np.asarray(state, dtype=complex), sys)


def _bloch(first, sys):
    return 2 * first / sys.n_qubits


def _rho1(first, sys):
    s = _bloch(first, sys)
    return (_I2 + np.einsum("...a,aij->...ij", s, PAULI)) / 2


def _rho12(first, second, sys):
    n = sys.n_qubits
    s = _bloch(first, sys)
    corr = (2 * second - n * np.eye(3)) / (n * (n - 1))
    return (np.eye(4)
            + np.einsum("...a,aij->...ij", s, _LOCAL_BASIS)
            + np.einsum("...ab,abij->...ij", corr, _PAIR_BASIS)) / 4


def reduce_one_qubit(state: np.ndarray, sys: SpinSystem) -> np.ndarray:
    first, _ = collective_moments(state, sys)
    return _rho1(first, sys)


def reduce_two_qubit(state: np.ndarray, sys: SpinSystem) -> np.ndarray:
    """4x4 marginal of any two qubits, basis |00>, |01>, |10>, |11>."""
    if sys.n_qubits < 2:
        raise NTooSmall("two-qubit marginal needs N >= 2")
    first, second = collective_moments(state, sys)
    return _rho12(first, second, sys)


def purity_to_Q(rho1: np.ndarray):
    q = 2 - 2 * np.einsum("...ij,...ji->...", rho1, rho1).real
    return np.clip(q, 0.0, 1.0)


def bipartite_Q(state: np.ndarray, sys: SpinSystem) -> float:
    """Q = 2 - (2/N) sum_i tr(rho_i^2); all marginals coincide here."""
    return float(purity_to_Q(reduce_one_qubit(state, sys)))


def partial_transpose(rho12: np.ndarray) -> np.ndarray:
    """Transpose over the second qubit."""
    shape = rho12.shape[:-2]
    r = rho12.reshape(shape + (2, 2, 2, 2))
    return np.swapaxes(r, -1, -3).reshape(shape + (4, 4))


def negativity(rho12: np.ndarray):
    ev = np.linalg.eigvalsh(partial_transpose(rho12))
    out = -np.where(ev < 0, ev, 0.0).sum(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def concurrence(rho12: np.ndarray):
    """Wootters concurrence max(0, l1 - l2 - l3 - l4).

    With rho = W W^dagger the l_i are the singular values of W^T (sy x sy) W,
    which avoids square roots of round-off sized eigenvalues of rho rho~.
    Eigenvalues of rho below RANK_TOL (relative) are treated as exact zeros:
    symmetric states have rank-deficient pair marginals and C is only
    Hoelder-1/2 continuous there.
    """
    ev, vec = np.linalg.eigh(rho12)
    ev = np.where(ev > RANK_TOL * ev[..., -1:], ev, 0.0)
    w = vec * np.sqrt(ev)[..., None, :]
    m = np.swapaxes(w, -1, -2) @ _YY @ w
    lam = np.linalg.svd(m, compute_uv=False)
    c = np.clip(lam[..., 0] - lam[..., 1:].sum(axis=-1), 0.0, 1.0)
    return float(c) if np.ndim(c) == 0 else c


def binary_entropy(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -x * np.log2(x) - (1 - x) * np.log2(1 - x)
    return np.where((x <= 0) | (x >= 1), 0.0, h)


def eof_from_concurrence(c):
    c = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
    out = binary_entropy((1 + np.sqrt(1 - c * c)) / 2)
    return float(out) if np.ndim(out) == 0 else out


def entanglement_of_formation(rho12: np.ndarray):
    return eof_from_concurrence(concurrence(rho12))


def entanglement_report(state: np.ndarray, sys: SpinSystem) -> EntanglementReport:
    if sys.n_qubits < 2:
        raise NTooSmall("pairwise measures need N >= 2")
    first, second = collective_moments(state, sys)
    rho1 = _rho1(first, sys)
    rho12 = _rho12(first, second, sys)
    c = concurrence(rho12)
    return EntanglementReport(
        Q=float(purity_to_Q(rho1)),
        negativity=negativity(rho12),
        concurrence=c,
        eof=eof_from_concurrence(c),
    )


def entanglement_series(states: np.ndarray, sys: SpinSystem) -> dict[str, np.ndarray]:
    """Q, negativity, concurrence and eof for every column of `states`."""
    first, second = _moments(np.asarray(states, dtype=complex), sys)
    rho1 = _rho1(first, sys)
    rho12 = _rho12(first, second, sys)
    c = np.atleast_1d(concurrence(rho12))
    return {
        "Q": purity_to_Q(rho1),
        "negativity": np.atleast_1d(negativity(rho12)),
        "concurrence": c,
        "eof": np.atleast_1d(eof_from_concurrence(c)),
    }
