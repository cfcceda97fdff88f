"""Collective spin operators and coherent states in the symmetric Dicke basis.

Basis vectors are ordered m = j, j-1, ..., -j, so index 0 is the
highest-weight state |j, j>.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import AngleRangeError, NotHermitianError

HERMITIAN_TOL = 1e-10
_ANGLE_SLACK = 1e-12


@dataclass(frozen=True)
class SpinSystem:
    """N qubits restricted to the permutation-symmetric sector, j = N/2."""

    n_qubits: int

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise ValueError(f"n_qubits must be a positive integer, got {self.n_qubits!r}")

    @property
    def j(self) -> float:
        return self.n_qubits / 2

    @property
    def dim(self) -> int:
        return self.n_qubits + 1

    @property
    def m_values(self) -> np.ndarray:
        return self.j - np.arange(self.dim)


@lru_cache(maxsize=64)
def _j_operators(n_qubits: int):
    sys = SpinSystem(n_qubits)
    j, m = sys.j, sys.m_values
    # <j, m+1| J+ |j, m> sits on the superdiagonal for descending m
    ladder = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = np.diag(ladder, 1).astype(complex)
    jx = (jp + jp.T) / 2
    jy = (jp - jp.T) / 2j
    jz = np.diag(m).astype(complex)
    for a in (jx, jy, jz):
        a.flags.writeable = False
    return jx, jy, jz


def build_j_operators(sys: SpinSystem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Jx, Jy, Jz) as dense complex matrices of shape (dim, dim).

    The arrays are cached and read-only; copy before mutating.
    """
    return _j_operators(sys.n_qubits)


def hermitian_exponential(h: np.ndarray, s: float) -> np.ndarray:
    """exp(-i s H) for Hermitian H, via its eigendecomposition."""
    h = np.asarray(h)
    asym = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if asym > HERMITIAN_TOL:
        raise NotHermitianError(f"matrix is not Hermitian (max asymmetry {asym:.3e})")
    w, v = np.linalg.eigh((h + h.conj().T) / 2)
    return (v * np.exp(-1j * s * w)) @ v.conj().T


def _check_angles(theta: float, phi: float) -> None:
    if not (-_ANGLE_SLACK <= theta <= np.pi + _ANGLE_SLACK):
        raise AngleRangeError(f"theta={theta} outside [0, pi]")
    if not (-np.pi - _ANGLE_SLACK <= phi <= np.pi + _ANGLE_SLACK):
        raise AngleRangeError(f"phi={phi} outside [-pi, pi]")


def rotation_operator(sys: SpinSystem, theta: float, phi: float) -> np.ndarray:
    """R(theta, phi) = exp{i theta [Jx sin(phi) - Jy cos(phi)]}."""
    _check_angles(theta, phi)
    jx, jy, _ = build_j_operators(sys)
    gen = jx * np.sin(phi) - jy * np.cos(phi)
    return hermitian_exponential(gen, -theta)


def coherent_state(sys: SpinSystem, theta: float, phi: float) -> np.ndarray:
    """Spin coherent state |theta, phi> = R(theta, phi)|j, j>.

    Its Bloch vector <J>/j points along (sin t cos p, sin t sin p, cos t).
    """
    return rotation_operator(sys, theta, phi)[:, 0].copy()


def coherent_amplitudes(sys: SpinSystem, theta, phi) -> np.ndarray:
    """Closed-form coherent-state amplitudes, broadcast over angle arrays.

    Agrees with :func:`coherent_state` up to a global phase; used where many
    coherent states are needed at once (Husimi maps). Trailing axis is m.
    """
    n = sys.n_qubits
    r = np.arange(n + 1)  # r = j - m
    theta = np.asarray(theta, dtype=float)[..., None]
    phi = np.asarray(phi, dtype=float)[..., None]
    log_binom = 0.5 * (gammaln(n + 1) - gammaln(r + 1) - gammaln(n - r + 1))
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    mag = np.exp(log_binom + xlogy(n - r, np.abs(c)) + xlogy(r, np.abs(s)))
    mag = mag * np.sign(c) ** (n - r) * np.sign(s) ** r
    return mag * np.exp(1j * r * phi)


def expectation(state: np.ndarray, op: np.ndarray) -> complex:
    return np.vdot(state, op @ state)
