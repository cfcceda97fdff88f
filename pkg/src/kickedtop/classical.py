"""Classical kicked top at p = pi/2.

One kick maps a unit vector (X, Y, Z) to

    X' =  Z cos(kX) + Y sin(kX)
    Y' = -Z sin(kX) + Y cos(kX)
    Z' = -X

which preserves X^2 + Y^2 + Z^2. The poles (0, +-1, 0) are fixed for every k.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NoConvergence, NotAFixedPoint

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 100
FIXED_POINT_TOL = 1e-9
STABILITY_SLACK = 1e-9
POLE_SIN_EPS = 1e-9

BIFURCATION_OFFSET = 1e-3
BIFURCATION_TRANSIENT = 1000
BIFURCATION_RECORD = 100


class SpherePoint(NamedTuple):
    x: float
    y: float
    z: float

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "SpherePoint":
        st = np.sin(theta)
        return cls(float(st * np.cos(phi)), float(st * np.sin(phi)), float(np.cos(theta)))

    def angles(self) -> "SphereAngles":
        return to_angles(self)


class SphereAngles(NamedTuple):
    theta: float
    phi: float


SOUTH_POLE = SpherePoint(0.0, -1.0, 0.0)
NORTH_POLE = SpherePoint(0.0, 1.0, 0.0)


def to_angles(pt) -> SphereAngles:
    """(theta, phi) of a unit vector; phi is reported as 0 on the z axis."""
    x, y, z = (float(c) for c in pt)
    r = np.sqrt(x * x + y * y + z * z)
    theta = float(np.arccos(np.clip(z / r, -1.0, 1.0)))
    if np.hypot(x, y) / r < POLE_SIN_EPS:
        return SphereAngles(theta, 0.0)
    return SphereAngles(theta, float(np.arctan2(y, x)))


@dataclass(frozen=True)
class StabilityReport:
    fixed_point: SpherePoint
    multipliers: tuple[complex, complex]
    is_stable: bool


def _step(v: np.ndarray, k: float) -> np.ndarray:
    x, y, z = v
    c, s = np.cos(k * x), np.sin(k * x)
    return np.array([z * c + y * s, -z * s + y * c, -x])


def _step_derivative(v: np.ndarray, k: float) -> np.ndarray:
    """3x3 derivative of the kick map in ambient coordinates."""
    x, y, z = v
    c, s = np.cos(k * x), np.sin(k * x)
    return np.array([
        [k * (-z * s + y * c), s, c],
        [k * (-z * c - y * s), c, -s],
        [-1.0, 0.0, 0.0],
    ])


def _reference_axis(v: np.ndarray) -> np.ndarray:
    ref = np.zeros(3)
    ref[np.argmin(np.abs(v))] = 1.0
    return ref


def tangent_frame(v, ref=None) -> np.ndarray:
    """Orthonormal (e1, e2) spanning the tangent plane at v, as a 3x2 matrix.

    e1, e2, v form a right-handed triad. By default the reference axis is the
    coordinate axis least aligned with v.
    """
    v = np.asarray(v, dtype=float)
    if ref is None:
        ref = _reference_axis(v)
    e1 = np.cross(ref, v)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    return np.column_stack([e1, e2])


def classical_step(pt, k: float) -> SpherePoint:
    return SpherePoint(*(float(c) for c in _step(np.asarray(pt, dtype=float), k)))


def trajectory(pt, k: float, n: int) -> list[SpherePoint]:
    """Orbit of pt: n + 1 points, starting with pt itself."""
    if n < 0:
        raise ValueError("n must be non-negative")
    v = np.asarray(pt, dtype=float)
    out = [SpherePoint(*(float(c) for c in v))]
    for _ in range(n):
        v = _step(v, k)
        out.append(SpherePoint(*(float(c) for c in v)))
    return out


def tangent_jacobian(pt, k: float) -> np.ndarray:
    """2x2 Jacobian of the map between the tangent frames at pt and its image."""
    v = np.asarray(pt, dtype=float)
    w = _step(v, k)
    ref = _reference_axis(v)
    # same reference axis on both ends, so fixed points get one frame
    f_ref = ref if abs(ref @ w) < 0.9 else None
    e = tangent_frame(v, ref)
    f = tangent_frame(w, f_ref)
    return f.T @ _step_derivative(v, k) @ e


def _residual(v: np.ndarray, k: float) -> float:
    return float(np.linalg.norm(_step(v, k) - v))


def find_fixed_point(seed, k: float) -> SpherePoint:
    """Newton iteration for a fixed point, in a tangent chart re-anchored at each iterate.

    Raises NoConvergence when the residual is still above 1e-12 after 100 steps.
    """
    v = np.asarray(seed, dtype=float)
    v = v / np.linalg.norm(v)
    for _ in range(NEWTON_MAX_ITER + 1):
        r = _step(v, k) - v
        if np.linalg.norm(r) < NEWTON_TOL:
            return SpherePoint(*(float(c) for c in v))
        e = tangent_frame(v)
        jac = e.T @ _step_derivative(v, k) @ e - np.eye(2)
        try:
            delta = np.linalg.solve(jac, -(e.T @ r))
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Newton system at k={k}") from exc
        v = v + e @ delta
        v = v / np.linalg.norm(v)
    raise NoConvergence(
        f"no fixed point within {NEWTON_MAX_ITER} Newton steps at k={k} "
        f"(residual {_residual(v, k):.3e})"
    )


def stability(pt, k: float) -> StabilityReport:
    v = np.asarray(pt, dtype=float)
    res = _residual(v, k)
    if res > FIXED_POINT_TOL:
        raise NotAFixedPoint(f"residual {res:.3e} exceeds {FIXED_POINT_TOL}")
    mult = np.linalg.eigvals(tangent_jacobian(v, k))
    mu = (complex(mult[0]), complex(mult[1]))
    stable = bool(np.max(np.abs(mult)) <= 1 + STABILITY_SLACK)
    return StabilityReport(SpherePoint(*(float(c) for c in v)), mu, stable)


def k_grid(k_min: float, k_max: float, k_step: float) -> np.ndarray:
    """Inclusive uniform grid, rounded so repeated calls give identical values."""
    if k_step <= 0:
        raise ValueError("k_step must be positive")
    if k_max < k_min:
        raise ValueError("k_max must not be below k_min")
    n = int(np.floor((k_max - k_min) / k_step + 1e-9)) + 1
    return np.round(k_min + k_step * np.arange(n), 12)


def _displaced(seed, offset: float) -> np.ndarray:
    theta, phi = to_angles(seed)
    theta = theta + offset if theta + offset <= np.pi else theta - offset
    return np.asarray(SpherePoint.from_angles(theta, phi))


def _scan_one(args) -> list[tuple[float, float, float]]:
    k, seed, transient, record, offset = args
    v = _displaced(seed, offset)
    for _ in range(transient):
        v = _step(v, k)
    rows = []
    for _ in range(record):
        v = _step(v, k)
        theta, phi = to_angles(v)
        rows.append((float(k), theta, phi))
    return rows


def bifurcation_scan(k_min: float, k_max: float, k_step: float, seed,
                     transient: int = BIFURCATION_TRANSIENT,
                     record: int = BIFURCATION_RECORD,
                     offset: float = BIFURCATION_OFFSET,
                     workers: int = 1) -> list[tuple[float, float, float]]:
    """Rows (k, theta, phi) of the long-time orbit started next to `seed`.

    For every k the seed is pushed `offset` radians in theta, iterated
    `transient` times, then `record` further iterates are kept. Rows come out
    ordered by k and then by iterate, whatever the worker count.
    """
    if transient < 1 or record < 1:
        raise ValueError("transient and record must be >= 1")
    seed = tuple(float(c) for c in seed)
    tasks = [(float(k), seed, transient, record, offset) for k in k_grid(k_min, k_max, k_step)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_scan_one, tasks))
    else:
        chunks = [_scan_one(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]
