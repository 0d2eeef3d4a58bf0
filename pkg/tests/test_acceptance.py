"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one PASS line once its assertions hold; run with
``pytest -v tests/test_acceptance.py`` (add ``-s`` to see the lines live).
"""

import time

import numpy as np
import pytest

from singtrace._kernels import rk4_decay
from singtrace.geometry2d import exposed_face, hull
from singtrace.gradmap import check_bilipschitz
from singtrace.hamiltonian import Hamiltonian, minimal_selection
from singtrace.lipcurve import (
    SampledCurve,
    euler_right_ode,
    has_min_slope,
    reparam_by_length,
)
from singtrace.scenarios import get
from singtrace.semiconcave import normalize
from singtrace.tracer import TraceConfig, build_characteristic, verify

CFG = TraceConfig(p_step=1e-3, t_max=1.0, ode_tol=1e-8)


def _passed(num, text):
    print(f"ACCEPT {num:02d} PASS {text}")


@pytest.fixture(scope="module")
def quad2_run():
    s = get("quad2")
    prob = normalize(s.u, s.H)
    t0 = time.perf_counter()
    tr = build_characteristic(prob, s.H, s.x0, CFG)
    elapsed = time.perf_counter() - t0
    return s, prob, tr, elapsed


@pytest.fixture(scope="module")
def eik2_run():
    s = get("eik2")
    prob = normalize(s.u, s.H)
    t0 = time.perf_counter()
    tr = build_characteristic(prob, s.H, s.x0, CFG)
    elapsed = time.perf_counter() - t0
    return s, prob, tr, elapsed


def test_01_quad2_closed_form(quad2_run):
    s, prob, tr, elapsed = quad2_run
    assert tr.termination == "reached_t_max"
    ref = np.stack([np.zeros_like(tr.times), np.exp(-tr.times)], axis=1)
    sup = float(np.max(np.hypot(*(tr.points - ref).T)))
    assert sup <= 1e-3
    assert elapsed < 5.0
    _passed(1, f"quad2 sup error {sup:.2e} <= 1e-3, runtime {elapsed:.2f}s < 5s")


def test_02_eik2_rk4_reference(eik2_run):
    s, prob, tr, elapsed = eik2_run
    assert tr.termination == "reached_t_max"
    n = 1_000_000  # RK4 step 1e-6 over [0, 1]
    ys = rk4_decay(1.0, 1.0, n, 100, 1)
    tgrid = np.linspace(0.0, 1.0, len(ys))
    ref_y = np.interp(tr.times, tgrid, ys)
    sup = float(np.max(np.hypot(tr.points[:, 0], tr.points[:, 1] - ref_y)))
    x1_max = float(np.max(np.abs(tr.points[:, 0])))
    assert sup <= 1e-3
    assert x1_max <= 1e-6
    assert elapsed < 5.0
    _passed(
        2,
        f"eik2 sup error {sup:.2e} <= 1e-3, |x1| <= {x1_max:.2e}, "
        f"runtime {elapsed:.2f}s < 5s",
    )


def test_03_right_continuity(quad2_run, eik2_run):
    worst = 0.0
    for s, prob, tr, _ in (quad2_run, eik2_run):
        rep = verify(tr, prob, s.H, CFG)
        worst = max(worst, rep.max_right_oscillation)
        assert rep.max_right_oscillation <= 1e-2
    _passed(3, f"forward oscillation of v over 10-step windows {worst:.2e} <= 1e-2")


def test_04_singularity_persistence(quad2_run, eik2_run):
    _, _, tr_q, _ = quad2_run
    diams_q = np.array([smp.diam for smp in tr_q.samples])
    assert np.all(diams_q >= 1.9) and np.all(diams_q <= 2.1)
    _, _, tr_e, _ = eik2_run
    diams_e = np.array([smp.diam for smp in tr_e.samples])
    assert np.all(diams_e > 0.1)
    _passed(
        4,
        f"quad2 diam in [1.9, 2.1] (min {diams_q.min():.3f}); "
        f"eik2 diam > 0.1 (min {diams_e.min():.3f})",
    )


def test_05_argmin_selection_and_inclusion(quad2_run, eik2_run):
    from singtrace.semiconcave import evaluate

    for s, prob, tr, _ in (quad2_run, eik2_run):
        for smp in tr.samples:
            uval = evaluate(s.u, smp.x)
            for q in smp.superdiff:
                assert smp.h_value <= s.H.value(smp.x, q, uval) + 1e-8
        fds = np.array([smp.fd_residual for smp in tr.samples[:-1]])
        gcs = np.array([smp.gc_residual for smp in tr.samples[:-1]])
        assert np.all(gcs <= 2.0 * fds + 1e-12)
    _passed(5, "h(p) minimal over all vertices; gc residual <= 2 * fd residual")


def test_06_bilipschitz_suite():
    s = get("quad2")
    prob = normalize(s.u, s.H)
    rng = np.random.default_rng(606)
    slopes = []
    while len(slopes) < 2000:
        x = s.u.domain.center + rng.uniform(-1, 1, 2) * s.u.domain.radius * 0.9
        if not s.u.domain.contains(x):
            continue
        Kw = prob.w_superdifferential(x)
        if Kw.n == 1:
            slopes.append(Kw.vertices[0])
        else:
            lam = rng.uniform()
            slopes.append(lam * Kw.vertices[0] + (1 - lam) * Kw.vertices[1])
    pairs = list(zip(slopes[:1000], slopes[1000:]))
    rep = check_bilipschitz(prob, pairs)
    assert rep.n_pairs == 1000
    assert rep.max_contraction_violation <= 1e-8
    assert rep.max_monotonicity_violation <= 1e-8
    _passed(
        6,
        f"1000 pairs: contraction violation {rep.max_contraction_violation:.2e}, "
        f"monotonicity violation {rep.max_monotonicity_violation:.2e}",
    )


def test_07_convex_geometry_oracles():
    rng = np.random.default_rng(707)
    for _ in range(200):
        K = hull(rng.uniform(-2, 2, size=(rng.integers(1, 7), 2)))
        th = rng.normal(size=2)
        nrm = np.hypot(*th)
        if nrm < 1e-9:
            continue
        scores = K.vertices @ (th / nrm)
        best = set(np.nonzero(scores <= scores.min() + 1e-12)[0])
        assert set(exposed_face(K, th).vertex_indices) == best
    worst = -np.inf
    for _ in range(200):
        K = hull(rng.uniform(-2, 2, size=(rng.integers(1, 7), 2)))
        B = rng.normal(size=(2, 2))
        H = Hamiltonian(A=B @ B.T + 0.2 * np.eye(2))
        sel = minimal_selection(H, (0, 0), 0.0, K)
        W = rng.dirichlet(np.ones(K.n), size=10_000)
        pts = W @ K.vertices
        hs = 0.5 * np.einsum("ij,jk,ik->i", pts, H.A, pts)
        worst = max(worst, float(sel.h_value) - float(hs.min()))
        assert sel.h_value <= float(hs.min()) + 1e-6
    _passed(7, f"200 exposed-face matches; selection excess {worst:.2e} <= 1e-6")


def test_08_right_ode_scheme():
    f = lambda y: 2.0 if y < 0.5 else 1.0
    exact = lambda t: np.where(t <= 0.25, 2 * t, 0.5 + (t - 0.25))
    for m in (10, 100, 1000):
        t, x = euler_right_ode(f, 1.0, 1.0, 2.0, m)
        err = float(np.max(np.abs(x - exact(t))))
        assert err <= 2.0 / m
        assert has_min_slope(t, x, 1.0)
        assert np.all(np.diff(x) <= 2.0 * np.diff(t) + 1e-15)
    _passed(8, "step-field Euler error <= 2/m at m in {10,100,1000}; "
               "b1-increasing and b2-Lipschitz")


def test_09_unit_speed_reparameterization():
    rng = np.random.default_rng(909)
    checked = 0
    for case in range(50):
        n = int(rng.integers(4, 50))
        pts = [rng.normal(size=2)]
        for _ in range(n):
            if case % 2 == 0 and rng.random() < 0.3:
                pts.append(pts[-1].copy())  # exact stall
            else:
                step = rng.normal(size=2)
                nrm = max(float(np.hypot(*step)), 1e-12)
                pts.append(pts[-1] + step * rng.uniform(0.02, 0.4) / nrm)
        pts = np.asarray(pts)
        gaps = rng.uniform(0.01, 0.3, size=len(pts))
        t = np.cumsum(gaps) - gaps[0]
        c = SampledCurve(params=t, points=pts)
        if c.length() <= 0:
            continue
        r = reparam_by_length(c)
        ratios = np.hypot(*np.diff(r.points, axis=0).T) / np.diff(r.params)
        assert np.all(ratios <= 1.0)
        assert np.all(ratios >= 1 - 1e-9)
        checked += 1
    assert checked == 50
    _passed(9, "50 random polylines (with stalls): chord ratios in [1-1e-9, 1]")


def test_10_critical_point_behavior():
    s = get("quad2")
    prob = normalize(s.u, s.H)
    tr0 = build_characteristic(prob, s.H, (0.0, 0.0), CFG)
    assert tr0.termination == "critical_point"
    assert np.allclose(tr0.points, 0.0)
    tr1 = build_characteristic(prob, s.H, (0.0, 1e-3), CFG)
    ys = tr1.points[:, 1]
    assert np.all(np.diff(ys) <= 1e-15)
    assert np.all(ys >= 0.0)
    _passed(
        10,
        f"(0,0) -> critical_point constant; (0,1e-3) -> monotone decay to "
        f"{ys.min():.2e} without crossing zero",
    )
