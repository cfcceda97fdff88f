"""Floquet operator of the quantum kicked top and scar detection.

One period is a rotation by p about y followed by the kick:

    F = exp(-i (k / 2j) Jz^2) exp(-i p Jy)

Pseudo-eigenpairs follow F |Phi_m> = exp(i x_m) |Phi_m>.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .errors import ImaginaryResidue, ResidualTooLarge
from .spin import SpinSystem, build_j_operators, coherent_amplitudes, coherent_state, hermitian_exponential

DEFAULT_P = np.pi / 2
DEFAULT_L = 500
DEFAULT_OMEGA_GRID = 4096

RESIDUAL_FAIL = 1e-8
CLUSTER_TOL = 1e-9
IMAG_TOL = 1e-9


@dataclass(frozen=True)
class FloquetOperator:
    sys: SpinSystem
    k: float
    p: float
    matrix: np.ndarray


@dataclass(frozen=True)
class FloquetSpectrum:
    """Quasi-energies in (-pi, pi], ascending; eigenstates are the columns."""

    quasi_energies: np.ndarray
    eigenstates: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.quasi_energies)

    def state(self, n: int) -> np.ndarray:
        return self.eigenstates[:, n]


@dataclass(frozen=True)
class SpectralDensity:
    omegas: np.ndarray
    magnitudes: np.ndarray


@dataclass(frozen=True)
class ScarRecord:
    k: float
    omega_peak: float
    state_index: int
    quasi_energy: float
    husimi_overlap: float
    state: np.ndarray


def build_floquet(sys: SpinSystem, k: float, p: float = DEFAULT_P) -> FloquetOperator:
    _, jy, _ = build_j_operators(sys)
    kick = np.exp(-1j * (k / (2 * sys.j)) * sys.m_values ** 2)
    rot = hermitian_exponential(jy, p)
    mat = kick[:, None] * rot
    mat.flags.writeable = False
    return FloquetOperator(sys, float(k), float(p), mat)


def _wrap_phase(x: np.ndarray) -> np.ndarray:
    x = np.angle(np.exp(1j * np.asarray(x)))
    return np.where(x <= -np.pi, x + 2 * np.pi, x)


def _clusters(x: np.ndarray, tol: float):
    """Index groups of sorted quasi-energies closer than tol (wrapping at +-pi)."""
    groups, cur = [], [0]
    for i in range(1, len(x)):
        if x[i] - x[i - 1] < tol:
            cur.append(i)
        else:
            groups.append(cur)
            cur = [i]
    groups.append(cur)
    if len(groups) > 1 and (x[0] + 2 * np.pi) - x[-1] < tol:
        groups[0] = groups.pop() + groups[0]
    return groups


def diagonalize(F: FloquetOperator) -> FloquetSpectrum:
    """Full pseudo-eigen decomposition of F.

    The complex Schur form of a normal matrix is diagonal, so the Schur
    vectors already form an orthonormal eigenbasis; near-degenerate clusters
    are re-orthonormalized explicitly anyway.
    """
    u = F.matrix
    t, z = schur(u, output="complex")
    x = _wrap_phase(np.angle(np.diag(t)))
    order = np.argsort(x, kind="stable")
    x, z = x[order], z[:, order]
    for grp in _clusters(x, CLUSTER_TOL):
        if len(grp) > 1:
            q, _ = np.linalg.qr(z[:, grp])
            z[:, grp] = q
    resid = np.linalg.norm(u @ z - z * np.exp(1j * x), axis=0)
    if resid.max() > RESIDUAL_FAIL:
        bad = int(np.argmax(resid))
        raise ResidualTooLarge(f"eigenpair {bad} residual {resid[bad]:.3e} at k={F.k}")
    return FloquetSpectrum(x, z)


def _spectrum(F, spectrum):
    return spectrum if spectrum is not None else diagonalize(F)


def propagate(y0: np.ndarray, F: FloquetOperator, n: int,
              spectrum: FloquetSpectrum | None = None) -> np.ndarray:
    """State after n kicks, via the eigen-expansion of F^n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return np.array(y0, dtype=complex)
    sp = _spectrum(F, spectrum)
    v = sp.eigenstates
    return v @ (np.exp(1j * n * sp.quasi_energies) * (v.conj().T @ y0))


def propagate_series(y0: np.ndarray, spectrum: FloquetSpectrum, n: int) -> np.ndarray:
    """States after 1..n kicks as the columns of a (dim, n) array."""
    v = spectrum.eigenstates
    c = v.conj().T @ y0
    steps = np.arange(1, n + 1)
    return v @ (np.exp(1j * np.outer(spectrum.quasi_energies, steps)) * c[:, None])


def husimi_overlap(phi_n: np.ndarray, sys: SpinSystem, theta: float, phi: float) -> float:
    """|<phi_n | theta, phi>|^2."""
    gamma = coherent_state(sys, theta, phi)
    return float(abs(np.vdot(phi_n, gamma)) ** 2)


def husimi_weights(gamma0: np.ndarray, spectrum: FloquetSpectrum) -> np.ndarray:
    """H_n = |<Phi_n|gamma0>|^2 for every eigenstate."""
    return np.abs(spectrum.eigenstates.conj().T @ gamma0) ** 2


def m_step_autocorrelation(gamma0: np.ndarray, spectrum: FloquetSpectrum, L: int) -> np.ndarray:
    """f_M = <gamma0|F^M|gamma0> for M = -L..L (index M + L)."""
    if L < 1:
        raise ValueError("L must be >= 1")
    h = husimi_weights(gamma0, spectrum)
    m = np.arange(-L, L + 1)
    return np.exp(1j * np.outer(m, spectrum.quasi_energies)) @ h


def omega_grid(size: int) -> np.ndarray:
    return -np.pi + 2 * np.pi * np.arange(size) / size


def spectral_transform(f: np.ndarray, omega_grid_size: int = DEFAULT_OMEGA_GRID) -> SpectralDensity:
    """|sum_M exp(-i omega M) f_M| on a uniform grid over [-pi, pi).

    f must be Hermitian-symmetric (f_-M = conj f_M), which makes the sum real.
    """
    f = np.asarray(f, dtype=complex)
    if len(f) % 2 != 1:
        raise ValueError("f must have odd length 2L+1")
    L = len(f) // 2
    m = np.arange(-L, L + 1)
    om = omega_grid(omega_grid_size)
    total = np.exp(-1j * np.outer(om, m)) @ f
    imag = np.max(np.abs(total.imag))
    if imag > IMAG_TOL * max(1.0, np.max(np.abs(total.real))):
        raise ImaginaryResidue(f"imaginary part {imag:.3e} in spectral transform")
    return SpectralDensity(om, np.abs(total.real))


def _cluster_of(x: np.ndarray, n: int) -> np.ndarray:
    d = np.abs(_wrap_phase(x - x[n]))
    return np.flatnonzero(d < CLUSTER_TOL)


def select_scar(gamma0: np.ndarray, spectrum: FloquetSpectrum, density: SpectralDensity, L: int):
    """Pick the scarred eigenstate belonging to the highest spectral peak.

    Returns (omega_peak, index, quasi_energy, overlap, state). Inside a
    degenerate cluster the eigenbasis is arbitrary, so the state returned is
    the normalized projection of gamma0 onto that eigenspace.
    """
    h = husimi_weights(gamma0, spectrum)
    x = spectrum.quasi_energies
    ipk = int(np.argmax(density.magnitudes))
    omega_peak = float(density.omegas[ipk])
    window = 2 * np.pi / (2 * L + 1)
    cand = np.flatnonzero(np.abs(_wrap_phase(x - omega_peak)) <= window)
    n = int(cand[np.argmax(h[cand])]) if len(cand) else int(np.argmax(h))
    grp = _cluster_of(x, n)
    if len(grp) > 1:
        basis = spectrum.eigenstates[:, grp]
        proj = basis @ (basis.conj().T @ gamma0)
        weight = float(np.vdot(proj, proj).real)
        state = proj / np.sqrt(weight)
    else:
        weight = float(h[n])
        state = spectrum.eigenstates[:, n].copy()
    return omega_peak, n, float(x[n]), min(weight, 1.0), state


def locate_scar(sys: SpinSystem, k: float, p: float = DEFAULT_P,
                gamma0_angles: tuple[float, float] = (np.pi / 2, -np.pi / 2),
                L: int = DEFAULT_L, omega_grid_size: int = DEFAULT_OMEGA_GRID,
                return_density: bool = False):
    """Find the pseudo-eigenstate scarred by the fixed point at gamma0_angles."""
    F = build_floquet(sys, k, p)
    spec = diagonalize(F)
    gamma0 = coherent_state(sys, *gamma0_angles)
    dens = spectral_transform(m_step_autocorrelation(gamma0, spec, L), omega_grid_size)
    omega_peak, n, xn, overlap, state = select_scar(gamma0, spec, dens, L)
    rec = ScarRecord(float(k), omega_peak, n, xn, overlap, state)
    return (rec, dens) if return_density else rec


def husimi_grid(n_theta: int, n_phi: int) -> tuple[np.ndarray, np.ndarray]:
    """Cell midpoints covering theta in [0, pi] and phi in [-pi, pi)."""
    theta = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    phi = -np.pi + (np.arange(n_phi) + 0.5) * 2 * np.pi / n_phi
    return theta, phi


def husimi_map(state: np.ndarray, sys: SpinSystem, n_theta: int, n_phi: int):
    """Husimi function |<theta, phi|state>|^2 on the midpoint grid.

    Returns (theta, phi, values) with values of shape (n_theta, n_phi).
    """
    if n_theta < 2 or n_phi < 2:
        raise ValueError("grid sizes must be >= 2")
    theta, phi = husimi_grid(n_theta, n_phi)
    # amplitude factorizes: theta part times exp(i r phi), r = j - m
    a = coherent_amplitudes(sys, theta, 0.0).conj()
    r = np.arange(sys.dim)
    ph = np.exp(-1j * np.outer(r, phi))
    amp = a @ (state[:, None] * ph)
    return theta, phi, np.clip(np.abs(amp) ** 2, 0.0, 1.0)
