"""Acceptance criteria, one test each.

Every criterion is a function returning (passed, detail). The test records a
PASS/FAIL line (printed in the terminal summary by conftest) and then asserts.
Run standalone with ``python3 tests/test_acceptance.py`` to get just the lines.
"""
import math
import sys

import numpy as np
import pytest

from kickedtop.classical import SOUTH_POLE, stability
from kickedtop.entanglement import (bipartite_Q, concurrence, negativity, reduce_one_qubit,
                                    reduce_two_qubit)
from kickedtop.experiments import ExperimentConfig, read_table, run, run_branch_scan, run_kick_evolution
from kickedtop.floquet import (build_floquet, diagonalize, husimi_map, husimi_weights, locate_scar,
                               propagate)
from kickedtop.spin import SpinSystem, build_j_operators, coherent_state

import oracle

RESULTS = {}


def record(number, title, passed, detail):
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title} ({detail})"
    RESULTS[number] = line
    print(line)
    return passed


# ---------------------------------------------------------------- 1

def criterion_1():
    worst = {"commutator": 0.0, "casimir": 0.0, "unitarity": 0.0, "norm": 0.0}
    for j in (5, 25, 55):
        s = SpinSystem(2 * j)
        jx, jy, jz = build_j_operators(s)
        for a, b, c in ((jx, jy, jz), (jy, jz, jx), (jz, jx, jy)):
            worst["commutator"] = max(worst["commutator"], np.max(np.abs(a @ b - b @ a - 1j * c)))
        cas = jx @ jx + jy @ jy + jz @ jz - j * (j + 1) * np.eye(s.dim)
        worst["casimir"] = max(worst["casimir"], np.max(np.abs(cas)))
        for k in (0.5, 2.0, 6.8, 12.73):
            F = build_floquet(s, k)
            worst["unitarity"] = max(worst["unitarity"],
                                     np.max(np.abs(F.matrix.conj().T @ F.matrix - np.eye(s.dim))))
            y = propagate(coherent_state(s, math.pi / 2, -math.pi / 2), F, 500)
            worst["norm"] = max(worst["norm"], abs(np.linalg.norm(y) - 1))
    limits = {"commutator": 1e-12, "casimir": 1e-10, "unitarity": 1e-12, "norm": 1e-10}
    passed = all(worst[name] < limits[name] for name in limits)
    return passed, ", ".join(f"{name} {worst[name]:.1e}" for name in limits)


# ---------------------------------------------------------------- 2

def criterion_2():
    rng = np.random.default_rng(7)
    worst = 0.0
    for n in (3, 4):
        s = SpinSystem(n)
        emb = oracle.dicke_embedding(n)
        for _ in range(20):
            k, theta, phi = rng.uniform(0, 6.8), rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi)
            psi = propagate(coherent_state(s, theta, phi), build_floquet(s, k), 25)
            # independent route: single-qubit tensor power, explicit 2^N Floquet matrix
            q = np.array([math.cos(theta / 2), math.sin(theta / 2) * np.exp(1j * phi)])
            full = q
            for _ in range(n - 1):
                full = np.kron(full, q)
            full = np.linalg.matrix_power(oracle.floquet_full(n, k, math.pi / 2), 25) @ full
            r1_ref = oracle.reduced(full, n, [0])
            r12_ref = oracle.reduced(full, n, [0, 1])
            r12 = reduce_two_qubit(psi, s)
            errs = [
                np.max(np.abs(reduce_one_qubit(psi, s) - r1_ref)),
                np.max(np.abs(r12 - r12_ref)),
                abs(bipartite_Q(psi, s) - oracle.q_ref(full, n)),
                abs(negativity(r12) - oracle.negativity_ref(r12_ref)),
                abs(concurrence(r12) - oracle.concurrence_ref(r12_ref)),
            ]
            worst = max(worst, *errs)
    return worst < 1e-10, f"max deviation {worst:.1e} over 40 draws"


# ---------------------------------------------------------------- 3

def criterion_3():
    def modulus(k):
        return max(abs(m) for m in stability(SOUTH_POLE, k).multipliers)

    lo, hi = 1.0, 3.0
    while hi - lo > 1e-6:
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if modulus(mid) <= 1 + 1e-9 else (lo, mid)
    return 1.99 <= lo and hi <= 2.01, f"k* in [{lo:.6f}, {hi:.6f}]"


# ---------------------------------------------------------------- 4

def criterion_4(tmp_path):
    out = tmp_path / "scar.csv"
    run("scar-scan", ExperimentConfig(n_qubits=50, k_min=0.0, k_max=6.8, k_step=0.1, out=str(out)))
    t = read_table(out)
    k = t.column("k")
    k_eof = k[np.argmax(t.column("eof"))]
    k_neg = k[np.argmax(t.column("negativity"))]
    # 2.0 +- 0.2 inclusive; the slack absorbs the decimal representation of the grid
    passed = abs(k_eof - 2.0) <= 0.2 + 1e-9 and abs(k_neg - 2.0) <= 0.2 + 1e-9
    return passed, f"eof peak at k={k_eof:g}, negativity peak at k={k_neg:g}"


# ---------------------------------------------------------------- 5

def criterion_5():
    t = run_kick_evolution(ExperimentConfig(n_qubits=10, k_min=0.0, k_max=6.8, k_step=0.1, n_kicks=500))
    k, pole, eof = t.column("k"), t.column("pole"), t.column("eof")
    south, north = eof[pole == "south"], eof[pole == "north"]
    ks = k[pole == "south"]
    at2 = south[np.isclose(ks, 2.0)][0]
    base = south[(ks >= 0.1 - 1e-9) & (ks <= 1.5 + 1e-9)].mean()
    ratio = at2 / base
    rel = np.max(np.abs(south - north) / np.maximum(np.abs(south), 1e-12))
    return ratio >= 2 and rel <= 0.1, f"E_p(2.0)/mean E_p[0.1,1.5] = {ratio:.2f}, south/north max rel diff {rel:.1e}"


# ---------------------------------------------------------------- 6

def local_minima_near(values, q, target, tol):
    inner = np.flatnonzero((q[1:-1] < q[:-2]) & (q[1:-1] < q[2:])) + 1
    hits = [values[i] for i in inner if abs(values[i] - target) <= tol + 1e-9]
    return hits


BRANCH_CASES = [
    # k, scan axis, fixed angle, expected location of the minimum
    (12.73, "theta", 0.38, 2.32),
    (2.2, "phi", 1.9, 1.2),
    (2.4, "phi", 2.1, 1.0),
]


def branch_minima(n_qubits, half_width=0.3, step=0.01):
    found = []
    for k, axis, fixed, target in BRANCH_CASES:
        other = {"phi": fixed} if axis == "theta" else {"theta": fixed}
        cfg = ExperimentConfig(n_qubits=n_qubits, k=k, n_kicks=500, scan_axis=axis,
                               scan_min=target - half_width, scan_max=target + half_width,
                               scan_step=step, **other)
        t = run_branch_scan(cfg)
        hits = local_minima_near(t.column(axis), t.column("Q"), target, 0.05)
        found.append((k, axis, target, hits))
    return found


def criterion_6():
    found = branch_minima(10)
    passed = all(hits for *_, hits in found)
    detail = "; ".join(f"k={k} {axis}: min near {target} {'found at ' + format(hits[0], '.2f') if hits else 'absent'}"
                       for k, axis, target, hits in found)
    return passed, detail


# ---------------------------------------------------------------- 7

def criterion_7():
    s = SpinSystem(70)
    h_regular = locate_scar(s, 0.5).husimi_overlap
    h_chaotic = locate_scar(s, 6.8).husimi_overlap
    return h_regular > h_chaotic, f"H(k=0.5) = {h_regular:.3f}, H(k=6.8) = {h_chaotic:.3f}"


# ---------------------------------------------------------------- 8

def criterion_8():
    worst = 0.0
    for n in (3, 4):
        w = np.zeros(n + 1, dtype=complex)
        w[1] = 1
        c = concurrence(reduce_two_qubit(w, SpinSystem(n)))
        c_ref = oracle.concurrence_ref(oracle.reduced(oracle.dicke_embedding(n) @ w, n, [0, 1]))
        worst = max(worst, abs(c - 2 / n), abs(c_ref - 2 / n))
    return worst < 1e-10, f"max |C - 2/N| {worst:.1e}"


# ---------------------------------------------------------------- 9

def criterion_9():
    s = SpinSystem(30)
    rng = np.random.default_rng(3)
    worst_sum = 0.0
    for _ in range(10):
        spec = diagonalize(build_floquet(s, rng.uniform(0, 6.8)))
        h = husimi_weights(coherent_state(s, rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi)), spec)
        worst_sum = max(worst_sum, abs(h.sum() - 1))
    state = diagonalize(build_floquet(s, 3.0)).state(7)
    theta, phi, vals = husimi_map(state, s, 200, 200)
    quad = np.sum(vals * np.sin(theta)[:, None]) * (math.pi / 200) * (2 * math.pi / 200) * s.dim / (4 * math.pi)
    passed = worst_sum < 1e-10 and abs(quad - 1) < 2e-2
    return passed, f"max |sum H_n - 1| {worst_sum:.1e}, quadrature {quad:.5f}"


# ---------------------------------------------------------------- 10

def criterion_10(tmp_path):
    blobs = {}
    for w in (1, 4, 8):
        out = tmp_path / f"scar_w{w}.csv"
        run("scar-scan", ExperimentConfig(n_qubits=20, workers=w, out=str(out)))
        blobs[w] = out.read_bytes()
    same = blobs[1] == blobs[4] == blobs[8]
    return same, f"{len(blobs[1])} bytes, identical={same}"


# ---------------------------------------------------------------- tests

TITLES = {
    1: "algebra and unitarity",
    2: "small-N oracle equivalence",
    3: "classical bifurcation at k=2",
    4: "scar-scan entanglement peak",
    5: "kick-evolution signature at k=2",
    6: "branch-scan minima at N=10",
    7: "scar delocalization trend",
    8: "W-state concurrence",
    9: "Husimi completeness",
    10: "determinism across worker counts",
}


def check(number, *args):
    passed, detail = globals()[f"criterion_{number}"](*args)
    assert record(number, TITLES[number], passed, detail), RESULTS[number]


def test_criterion_01_algebra_unitarity():
    check(1)


def test_criterion_02_small_n_oracle():
    check(2)


def test_criterion_03_bifurcation_k2():
    check(3)


@pytest.mark.slow
def test_criterion_04_scar_scan_peak(tmp_path):
    check(4, tmp_path)


def test_criterion_05_kick_evolution():
    check(5)


@pytest.mark.slow
def test_criterion_06_branch_minima():
    check(6)


def test_criterion_07_delocalization():
    check(7)


def test_criterion_08_w_concurrence():
    check(8)


def test_criterion_09_husimi_completeness():
    check(9)


@pytest.mark.slow
def test_criterion_10_determinism(tmp_path):
    check(10, tmp_path)


@pytest.mark.slow
def test_branch_minima_at_larger_n():
    """Supplementary: the same three minima with N=50 (narrower coherent states)."""
    found = branch_minima(50)
    for k, axis, target, hits in found:
        assert hits, f"no local minimum of Q within 0.05 of {axis}={target} at k={k}"


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        for number in TITLES:
            args = (Path(tmp),) if number in (4, 10) else ()
            passed, detail = globals()[f"criterion_{number}"](*args)
            record(number, TITLES[number], passed, detail)
    sys.exit(0 if all("PASS" in line for line in RESULTS.values()) else 1)
