"""Pure-Python kernel backend.

Reference implementations of the numeric hot paths. The compiled backend in
``_ext.pyx`` mirrors this module function for function; both operate on the
packed branch encoding produced by ``semiconcave.pack_branches``:

    kind 0 quadratic  params (qxx, qxy, qyy, bx, by, d)   u = -<Q(x-b),x-b>/2 + d
    kind 1 cone       params (ax, ay, c, d, r, 0)         u = d - c|x-a|
    kind 2 affine     params (gx, gy, d, 0, 0, 0)         u = <g,x> + d

Sheets are the shifted branches g_i(y) = u_i(y) - c1/2 |y|^2 - <p,y> used by
the concave-landscape maximization (c1 = semiconcavity constant + 1).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "pure"


def branch_value(kinds, params, i, x1, x2):
    k = kinds[i]
    q = params[i]
    if k == 0:
        z1 = x1 - q[3]
        z2 = x2 - q[4]
        return -0.5 * (q[0] * z1 * z1 + 2.0 * q[1] * z1 * z2 + q[2] * z2 * z2) + q[5]
    if k == 1:
        return q[3] - q[2] * math.hypot(x1 - q[0], x2 - q[1])
    return q[0] * x1 + q[1] * x2 + q[2]


def branch_grad(kinds, params, i, x1, x2):
    k = kinds[i]
    q = params[i]
    if k == 0:
        z1 = x1 - q[3]
        z2 = x2 - q[4]
        return (-(q[0] * z1 + q[1] * z2), -(q[1] * z1 + q[2] * z2))
    if k == 1:
        r = math.hypot(x1 - q[0], x2 - q[1])
        return (-q[2] * (x1 - q[0]) / r, -q[2] * (x2 - q[1]) / r)
    return (q[0], q[1])


def branch_hess(kinds, params, i, x1, x2):
    """Row-major (hxx, hxy, hyy) of the branch Hessian."""
    k = kinds[i]
    q = params[i]
    if k == 0:
        return (-q[0], -q[1], -q[2])
    if k == 1:
        z1 = x1 - q[0]
        z2 = x2 - q[1]
        r2 = z1 * z1 + z2 * z2
        r = math.sqrt(r2)
        # -(c/r) (I - zz^T/r^2)
        f = -q[2] / r
        return (f * (1.0 - z1 * z1 / r2), f * (-z1 * z2 / r2), f * (1.0 - z2 * z2 / r2))
    return (0.0, 0.0, 0.0)


def min_value(kinds, params, x1, x2):
    best = math.inf
    for i in range(len(kinds)):
        v = branch_value(kinds, params, i, x1, x2)
        if v < best:
            best = v
    return best


def active_indices(kinds, params, x1, x2, gap_tol):
    vals = [branch_value(kinds, params, i, x1, x2) for i in range(len(kinds))]
    m = min(vals)
    return [i for i, v in enumerate(vals) if v <= m + gap_tol]


def sheet_obj(kinds, params, c1, x1, x2, p1, p2):
    """Full landscape min_i u_i(y) - c1/2 |y|^2 - <p,y> at y = (x1,x2)."""
    return (
        min_value(kinds, params, x1, x2)
        - 0.5 * c1 * (x1 * x1 + x2 * x2)
        - (p1 * x1 + p2 * x2)
    )


def sheet_argmax(kinds, params, c1, i, p1, p2):
    """Unconstrained maximizer of sheet i; ok=0 when no interior critical point."""
    k = kinds[i]
    q = params[i]
    if k == 0:
        # (Q + c1 I) y = Q b - p
        a11 = q[0] + c1
        a12 = q[1]
        a22 = q[2] + c1
        r1 = q[0] * q[3] + q[1] * q[4] - p1
        r2 = q[1] * q[3] + q[2] * q[4] - p2
        det = a11 * a22 - a12 * a12
        if det <= 0.0:
            return (0.0, 0.0, 0)
        return ((a22 * r1 - a12 * r2) / det, (a11 * r2 - a12 * r1) / det, 1)
    if k == 1:
        # (c1 + c/|z|) z = -(c1 a + p) =: w with z = y - a
        w1 = -(c1 * q[0] + p1)
        w2 = -(c1 * q[1] + p2)
        nw = math.hypot(w1, w2)
        if nw <= q[2]:
            return (0.0, 0.0, 0)
        t = (nw - q[2]) / (c1 * nw)
        return (q[0] + t * w1, q[1] + t * w2, 1)
    if c1 <= 0.0:
        return (0.0, 0.0, 0)
    return ((q[0] - p1) / c1, (q[1] - p2) / c1, 1)


def _sheet_grad(kinds, params, c1, i, y1, y2, p1, p2):
    g1, g2 = branch_grad(kinds, params, i, y1, y2)
    return (g1 - c1 * y1 - p1, g2 - c1 * y2 - p2)


def ridge_argmax(kinds, params, c1, i, j, p1, p2, y01, y02, lam0, tol, maxit):
    """Maximize min(g_i, g_j) on the crossing curve u_i = u_j.

    Damped Newton on the stationarity system
        lam * grad g_i + (1 - lam) * grad g_j = 0,   u_i - u_j = 0.
    Returns (y1, y2, lam, ok).
    """
    y1, y2, lam = y01, y02, lam0

    def residual(y1, y2, lam):
        gi = _sheet_grad(kinds, params, c1, i, y1, y2, p1, p2)
        gj = _sheet_grad(kinds, params, c1, j, y1, y2, p1, p2)
        f1 = lam * gi[0] + (1.0 - lam) * gj[0]
        f2 = lam * gi[1] + (1.0 - lam) * gj[1]
        f3 = branch_value(kinds, params, i, y1, y2) - branch_value(
            kinds, params, j, y1, y2
        )
        return f1, f2, f3, gi, gj

    f1, f2, f3, gi, gj = residual(y1, y2, lam)
    fn = math.sqrt(f1 * f1 + f2 * f2 + f3 * f3)
    for _ in range(maxit):
        if fn <= tol:
            return (y1, y2, lam, 1)
        hi = branch_hess(kinds, params, i, y1, y2)
        hj = branch_hess(kinds, params, j, y1, y2)
        a11 = lam * (hi[0] - c1) + (1.0 - lam) * (hj[0] - c1)
        a12 = lam * hi[1] + (1.0 - lam) * hj[1]
        a22 = lam * (hi[2] - c1) + (1.0 - lam) * (hj[2] - c1)
        b1 = gi[0] - gj[0]
        b2 = gi[1] - gj[1]
        ui1, ui2 = branch_grad(kinds, params, i, y1, y2)
        uj1, uj2 = branch_grad(kinds, params, j, y1, y2)
        c1r = ui1 - uj1
        c2r = ui2 - uj2
        J = np.array([[a11, a12, b1], [a12, a22, b2], [c1r, c2r, 0.0]])
        try:
            step = np.linalg.solve(J, [-f1, -f2, -f3])
        except np.linalg.LinAlgError:
            return (y1, y2, lam, 0)
        alpha = 1.0
        for _ in range(40):
            ny1 = y1 + alpha * step[0]
            ny2 = y2 + alpha * step[1]
            nlam = lam + alpha * step[2]
            nf1, nf2, nf3, ngi, ngj = residual(ny1, ny2, nlam)
            nfn = math.sqrt(nf1 * nf1 + nf2 * nf2 + nf3 * nf3)
            if nfn < fn:
                break
            alpha *= 0.5
        else:
            return (y1, y2, lam, 0)
        y1, y2, lam = ny1, ny2, nlam
        f1, f2, f3, gi, gj = nf1, nf2, nf3, ngi, ngj
        fn = nfn
    return (y1, y2, lam, 1 if fn <= tol else 0)


def triple_point(kinds, params, i, j, k, y01, y02, tol, maxit):
    """Solve u_i = u_j = u_k by Newton; returns (y1, y2, ok)."""
    y1, y2 = y01, y02
    for _ in range(maxit):
        f1 = branch_value(kinds, params, i, y1, y2) - branch_value(
            kinds, params, j, y1, y2
        )
        f2 = branch_value(kinds, params, j, y1, y2) - branch_value(
            kinds, params, k, y1, y2
        )
        if math.hypot(f1, f2) <= tol:
            return (y1, y2, 1)
        gi = branch_grad(kinds, params, i, y1, y2)
        gj = branch_grad(kinds, params, j, y1, y2)
        gk = branch_grad(kinds, params, k, y1, y2)
        a11 = gi[0] - gj[0]
        a12 = gi[1] - gj[1]
        a21 = gj[0] - gk[0]
        a22 = gj[1] - gk[1]
        det = a11 * a22 - a12 * a21
        if det == 0.0:
            return (y1, y2, 0)
        y1 -= (a22 * f1 - a12 * f2) / det
        y2 -= (a11 * f2 - a21 * f1) / det
    f1 = branch_value(kinds, params, i, y1, y2) - branch_value(kinds, params, j, y1, y2)
    f2 = branch_value(kinds, params, j, y1, y2) - branch_value(kinds, params, k, y1, y2)
    return (y1, y2, 1 if math.hypot(f1, f2) <= tol else 0)


def euler_interp(knots, fvals, t_end, m):
    """Forward Euler for xdot = f(x), x(0) = 0, on the uniform m-cell grid.

    f is the piecewise-linear interpolant of (knots, fvals) clamped to the
    end values outside the knot range; knots must be increasing. Returns the
    m+1 grid values of x. The state is nondecreasing (f > 0), so the knot
    lookup is a forward walk.
    """
    n = len(knots)
    h = t_end / m
    out = np.empty(m + 1)
    out[0] = 0.0
    x = 0.0
    seg = 0
    for step in range(m):
        if x <= knots[0]:
            f = fvals[0]
        elif x >= knots[n - 1]:
            f = fvals[n - 1]
        else:
            while knots[seg + 1] < x:
                seg += 1
            w = (x - knots[seg]) / (knots[seg + 1] - knots[seg])
            f = fvals[seg] + w * (fvals[seg + 1] - fvals[seg])
        x += h * f
        out[step + 1] = x
    return out


def _decay_rhs(kind, y):
    if kind == 0:
        return -y
    if kind == 1:
        return -y / math.sqrt(1.0 + y * y)
    # radial speed on a three-site junction ray at unit circumradius
    return -(2.0 * y + 1.0) / (2.0 * math.sqrt(y * y + y + 1.0))


def rk4_decay(y0, t_end, n, stride, kind):
    """Fixed-step RK4 for the scalar scene oracles; emits every ``stride`` steps.

    kind 0: ydot = -y
    kind 1: ydot = -y / sqrt(1 + y^2)
    kind 2: ydot = -(2y + 1) / (2 sqrt(y^2 + y + 1))
    """
    h = t_end / n
    y = y0
    out = [y]
    for step in range(1, n + 1):
        k1 = _decay_rhs(kind, y)
        k2 = _decay_rhs(kind, y + 0.5 * h * k1)
        k3 = _decay_rhs(kind, y + 0.5 * h * k2)
        k4 = _decay_rhs(kind, y + h * k3)
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % stride == 0:
            out.append(y)
    if n % stride != 0:
        out.append(y)
    return np.asarray(out)
