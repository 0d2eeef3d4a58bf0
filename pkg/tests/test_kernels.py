"""Backend equivalence: the compiled kernels must match the pure reference."""

import numpy as np
import pytest

from singtrace._kernels import BACKEND, pure
from singtrace.scenarios import get
from singtrace.semiconcave import normalize

try:
    from singtrace._kernels import _ext
except ImportError:
    _ext = None

needs_ext = pytest.mark.skipif(_ext is None, reason="compiled backend not built")


def packed_scenes():
    out = []
    for sid in ("quad2", "eik2", "eik3", "aniso2"):
        s = get(sid)
        kinds, params = s.u.packed
        out.append((sid, kinds, params, normalize(s.u, s.H).c1))
    return out


@needs_ext
class TestBackendEquivalence:
    def test_values_and_grads(self):
        rng = np.random.default_rng(97)
        for sid, kinds, params, c1 in packed_scenes():
            for _ in range(200):
                x1, x2 = rng.uniform(-0.7, 0.7, size=2)
                assert _ext.min_value(kinds, params, x1, x2) == pytest.approx(
                    pure.min_value(kinds, params, x1, x2), abs=1e-15
                )
                for i in range(len(kinds)):
                    gv = pure.branch_grad(kinds, params, i, x1, x2)
                    ge = _ext.branch_grad(kinds, params, i, x1, x2)
                    assert np.allclose(gv, ge, atol=1e-15)
                    hv = pure.branch_hess(kinds, params, i, x1, x2)
                    he = _ext.branch_hess(kinds, params, i, x1, x2)
                    assert np.allclose(hv, he, atol=1e-15)

    def test_active_indices(self):
        rng = np.random.default_rng(101)
        for sid, kinds, params, c1 in packed_scenes():
            for _ in range(100):
                x1, x2 = rng.uniform(-0.7, 0.7, size=2)
                for tol in (1e-12, 1e-6, 1e-1):
                    assert _ext.active_indices(
                        kinds, params, x1, x2, tol
                    ) == pure.active_indices(kinds, params, x1, x2, tol)

    def test_sheet_argmax(self):
        rng = np.random.default_rng(103)
        for sid, kinds, params, c1 in packed_scenes():
            for _ in range(200):
                p1, p2 = rng.uniform(-2, 2, size=2)
                for i in range(len(kinds)):
                    a = pure.sheet_argmax(kinds, params, c1, i, p1, p2)
                    b = _ext.sheet_argmax(kinds, params, c1, i, p1, p2)
                    assert a[2] == b[2]
                    if a[2]:
                        assert np.allclose(a[:2], b[:2], atol=1e-13)

    def test_ridge_argmax(self):
        rng = np.random.default_rng(107)
        for sid, kinds, params, c1 in packed_scenes():
            for _ in range(100):
                p1, p2 = rng.uniform(-1.5, 1.5, size=2)
                y0 = rng.uniform(-0.3, 0.3, size=2)
                a = pure.ridge_argmax(
                    kinds, params, c1, 0, 1, p1, p2, y0[0], y0[1], 0.5, 1e-12, 60
                )
                b = _ext.ridge_argmax(
                    kinds, params, c1, 0, 1, p1, p2, y0[0], y0[1], 0.5, 1e-12, 60
                )
                assert a[3] == b[3]
                if a[3]:
                    assert np.allclose(a[:3], b[:3], atol=1e-9)

    def test_triple_point(self):
        s = get("eik3")
        kinds, params = s.u.packed
        a = pure.triple_point(kinds, params, 0, 1, 2, 0.1, 0.05, 1e-13, 60)
        b = _ext.triple_point(kinds, params, 0, 1, 2, 0.1, 0.05, 1e-13, 60)
        assert a[2] == b[2] == 1
        assert np.allclose(a[:2], b[:2], atol=1e-12)
        assert np.allclose(a[:2], (0.0, 0.0), atol=1e-10)

    def test_euler_interp(self):
        rng = np.random.default_rng(109)
        for _ in range(20):
            n = rng.integers(2, 30)
            knots = np.sort(rng.uniform(0, 1, size=n))
            knots[0] = 0.0
            vals = rng.uniform(0.5, 2.0, size=n)
            t_end = float(knots[-1] / vals.max())
            for m in (1, 7, 64, 1001):
                xa = pure.euler_interp(knots, vals, t_end, m)
                xb = _ext.euler_interp(knots, vals, t_end, m)
                assert np.allclose(xa, xb, rtol=0, atol=1e-14)

    def test_rk4_decay(self):
        for kind in (0, 1, 2):
            for stride in (1, 7, 100):
                ya = pure.rk4_decay(0.8, 1.0, 700, stride, kind)
                yb = _ext.rk4_decay(0.8, 1.0, 700, stride, kind)
                assert len(ya) == len(yb)
                assert np.allclose(ya, yb, rtol=0, atol=1e-15)


def test_backend_reports_name():
    assert BACKEND in ("pure", "cython")


def test_rk4_exponential_accuracy():
    # kind 0 is ydot = -y; RK4 at h = 1e-3 is accurate to ~1e-13
    ys = pure.rk4_decay(1.0, 1.0, 1000, 1000, 0)
    assert ys[-1] == pytest.approx(np.exp(-1.0), abs=1e-12)


def test_rk4_eik_matches_implicit_form():
    # independent check: F(y) = sqrt(1+y^2) + log((sqrt(1+y^2)-1)/(sqrt(1+y^2)+1))/2
    # is conserved as F(y(t)) = F(y0) - t along ydot = -y/sqrt(1+y^2)
    def F(y):
        s = np.sqrt(1.0 + y * y)
        return s + 0.5 * np.log((s - 1.0) / (s + 1.0))

    ys = pure.rk4_decay(1.0, 1.0, 10_000, 10_000, 1)
    assert F(ys[-1]) == pytest.approx(F(1.0) - 1.0, abs=1e-12)
