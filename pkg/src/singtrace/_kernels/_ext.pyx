# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend; mirrors pure.py function for function."""

from libc.math cimport hypot, sqrt, INFINITY

import numpy as np

BACKEND = "cython"


cdef inline double _bval(signed char k, const double[:] q, double x1, double x2) nogil:
    cdef double z1, z2
    if k == 0:
        z1 = x1 - q[3]
        z2 = x2 - q[4]
        return -0.5 * (q[0] * z1 * z1 + 2.0 * q[1] * z1 * z2 + q[2] * z2 * z2) + q[5]
    if k == 1:
        return q[3] - q[2] * hypot(x1 - q[0], x2 - q[1])
    return q[0] * x1 + q[1] * x2 + q[2]


cdef inline void _bgrad(signed char k, const double[:] q, double x1, double x2,
                        double* g1, double* g2) nogil:
    cdef double z1, z2, r
    if k == 0:
        z1 = x1 - q[3]
        z2 = x2 - q[4]
        g1[0] = -(q[0] * z1 + q[1] * z2)
        g2[0] = -(q[1] * z1 + q[2] * z2)
    elif k == 1:
        r = hypot(x1 - q[0], x2 - q[1])
        g1[0] = -q[2] * (x1 - q[0]) / r
        g2[0] = -q[2] * (x2 - q[1]) / r
    else:
        g1[0] = q[0]
        g2[0] = q[1]


cdef inline void _bhess(signed char k, const double[:] q, double x1, double x2,
                        double* hxx, double* hxy, double* hyy) nogil:
    cdef double z1, z2, r2, r, f
    if k == 0:
        hxx[0] = -q[0]
        hxy[0] = -q[1]
        hyy[0] = -q[2]
    elif k == 1:
        z1 = x1 - q[0]
        z2 = x2 - q[1]
        r2 = z1 * z1 + z2 * z2
        r = sqrt(r2)
        f = -q[2] / r
        hxx[0] = f * (1.0 - z1 * z1 / r2)
        hxy[0] = f * (-z1 * z2 / r2)
        hyy[0] = f * (1.0 - z2 * z2 / r2)
    else:
        hxx[0] = 0.0
        hxy[0] = 0.0
        hyy[0] = 0.0


def branch_value(const signed char[:] kinds, const double[:, :] params,
                 Py_ssize_t i, double x1, double x2):
    return _bval(kinds[i], params[i], x1, x2)


def branch_grad(const signed char[:] kinds, const double[:, :] params,
                Py_ssize_t i, double x1, double x2):
    cdef double g1 = 0.0, g2 = 0.0
    _bgrad(kinds[i], params[i], x1, x2, &g1, &g2)
    return (g1, g2)


def branch_hess(const signed char[:] kinds, const double[:, :] params,
                Py_ssize_t i, double x1, double x2):
    cdef double hxx = 0.0, hxy = 0.0, hyy = 0.0
    _bhess(kinds[i], params[i], x1, x2, &hxx, &hxy, &hyy)
    return (hxx, hxy, hyy)


def min_value(const signed char[:] kinds, const double[:, :] params,
              double x1, double x2):
    cdef double best = INFINITY, v
    cdef Py_ssize_t i
    for i in range(kinds.shape[0]):
        v = _bval(kinds[i], params[i], x1, x2)
        if v < best:
            best = v
    return best


def active_indices(const signed char[:] kinds, const double[:, :] params,
                   double x1, double x2, double gap_tol):
    cdef double best = INFINITY, v
    cdef Py_ssize_t i, n = kinds.shape[0]
    cdef list out = []
    for i in range(n):
        v = _bval(kinds[i], params[i], x1, x2)
        if v < best:
            best = v
    for i in range(n):
        if _bval(kinds[i], params[i], x1, x2) <= best + gap_tol:
            out.append(i)
    return out


def sheet_obj(const signed char[:] kinds, const double[:, :] params, double c1,
              double x1, double x2, double p1, double p2):
    cdef double best = INFINITY, v
    cdef Py_ssize_t i
    for i in range(kinds.shape[0]):
        v = _bval(kinds[i], params[i], x1, x2)
        if v < best:
            best = v
    return best - 0.5 * c1 * (x1 * x1 + x2 * x2) - (p1 * x1 + p2 * x2)


def sheet_argmax(const signed char[:] kinds, const double[:, :] params, double c1,
                 Py_ssize_t i, double p1, double p2):
    cdef signed char k = kinds[i]
    cdef const double[:] q = params[i]
    cdef double a11, a12, a22, r1, r2, det, w1, w2, nw, t
    if k == 0:
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
        w1 = -(c1 * q[0] + p1)
        w2 = -(c1 * q[1] + p2)
        nw = hypot(w1, w2)
        if nw <= q[2]:
            return (0.0, 0.0, 0)
        t = (nw - q[2]) / (c1 * nw)
        return (q[0] + t * w1, q[1] + t * w2, 1)
    if c1 <= 0.0:
        return (0.0, 0.0, 0)
    return ((q[0] - p1) / c1, (q[1] - p2) / c1, 1)


cdef inline void _sheet_grad(const signed char[:] kinds, const double[:, :] params,
                             double c1, Py_ssize_t i, double y1, double y2,
                             double p1, double p2, double* g1, double* g2) nogil:
    _bgrad(kinds[i], params[i], y1, y2, g1, g2)
    g1[0] = g1[0] - c1 * y1 - p1
    g2[0] = g2[0] - c1 * y2 - p2


def ridge_argmax(const signed char[:] kinds, const double[:, :] params, double c1,
                 Py_ssize_t i, Py_ssize_t j, double p1, double p2,
                 double y01, double y02, double lam0, double tol, int maxit):
    cdef double y1 = y01, y2 = y02, lam = lam0
    cdef double gi1, gi2, gj1, gj2, f1, f2, f3, fn
    cdef double hi1, hi2, hi3, hj1, hj2, hj3
    cdef double a11, a12, a22, b1, b2, c1r, c2r
    cdef double ui1, ui2, uj1, uj2
    cdef double d0, d1, d2, det, s1, s2, s3, alpha
    cdef double ny1, ny2, nlam, nf1, nf2, nf3, nfn
    cdef double ngi1, ngi2, ngj1, ngj2
    cdef int it, ls
    cdef bint improved

    _sheet_grad(kinds, params, c1, i, y1, y2, p1, p2, &gi1, &gi2)
    _sheet_grad(kinds, params, c1, j, y1, y2, p1, p2, &gj1, &gj2)
    f1 = lam * gi1 + (1.0 - lam) * gj1
    f2 = lam * gi2 + (1.0 - lam) * gj2
    f3 = _bval(kinds[i], params[i], y1, y2) - _bval(kinds[j], params[j], y1, y2)
    fn = sqrt(f1 * f1 + f2 * f2 + f3 * f3)
    for it in range(maxit):
        if fn <= tol:
            return (y1, y2, lam, 1)
        _bhess(kinds[i], params[i], y1, y2, &hi1, &hi2, &hi3)
        _bhess(kinds[j], params[j], y1, y2, &hj1, &hj2, &hj3)
        a11 = lam * (hi1 - c1) + (1.0 - lam) * (hj1 - c1)
        a12 = lam * hi2 + (1.0 - lam) * hj2
        a22 = lam * (hi3 - c1) + (1.0 - lam) * (hj3 - c1)
        b1 = gi1 - gj1
        b2 = gi2 - gj2
        _bgrad(kinds[i], params[i], y1, y2, &ui1, &ui2)
        _bgrad(kinds[j], params[j], y1, y2, &uj1, &uj2)
        c1r = ui1 - uj1
        c2r = ui2 - uj2
        # solve the 3x3 system [a11 a12 b1; a12 a22 b2; c1r c2r 0] s = -f
        det = (a11 * (a22 * 0.0 - b2 * c2r)
               - a12 * (a12 * 0.0 - b2 * c1r)
               + b1 * (a12 * c2r - a22 * c1r))
        if det == 0.0:
            return (y1, y2, lam, 0)
        d0 = -f1
        d1 = -f2
        d2 = -f3
        # Cramer's rule
        s1 = (d0 * (a22 * 0.0 - b2 * c2r)
              - a12 * (d1 * 0.0 - b2 * d2)
              + b1 * (d1 * c2r - a22 * d2)) / det
        s2 = (a11 * (d1 * 0.0 - b2 * d2)
              - d0 * (a12 * 0.0 - b2 * c1r)
              + b1 * (a12 * d2 - d1 * c1r)) / det
        s3 = (a11 * (a22 * d2 - d1 * c2r)
              - a12 * (a12 * d2 - d1 * c1r)
              + d0 * (a12 * c2r - a22 * c1r)) / det
        alpha = 1.0
        improved = False
        for ls in range(40):
            ny1 = y1 + alpha * s1
            ny2 = y2 + alpha * s2
            nlam = lam + alpha * s3
            _sheet_grad(kinds, params, c1, i, ny1, ny2, p1, p2, &ngi1, &ngi2)
            _sheet_grad(kinds, params, c1, j, ny1, ny2, p1, p2, &ngj1, &ngj2)
            nf1 = nlam * ngi1 + (1.0 - nlam) * ngj1
            nf2 = nlam * ngi2 + (1.0 - nlam) * ngj2
            nf3 = (_bval(kinds[i], params[i], ny1, ny2)
                   - _bval(kinds[j], params[j], ny1, ny2))
            nfn = sqrt(nf1 * nf1 + nf2 * nf2 + nf3 * nf3)
            if nfn < fn:
                improved = True
                break
            alpha *= 0.5
        if not improved:
            return (y1, y2, lam, 0)
        y1 = ny1
        y2 = ny2
        lam = nlam
        f1 = nf1
        f2 = nf2
        f3 = nf3
        gi1 = ngi1
        gi2 = ngi2
        gj1 = ngj1
        gj2 = ngj2
        fn = nfn
    return (y1, y2, lam, 1 if fn <= tol else 0)


def triple_point(const signed char[:] kinds, const double[:, :] params,
                 Py_ssize_t i, Py_ssize_t j, Py_ssize_t k,
                 double y01, double y02, double tol, int maxit):
    cdef double y1 = y01, y2 = y02
    cdef double f1, f2, gi1, gi2, gj1, gj2, gk1, gk2
    cdef double a11, a12, a21, a22, det
    cdef int it
    for it in range(maxit):
        f1 = _bval(kinds[i], params[i], y1, y2) - _bval(kinds[j], params[j], y1, y2)
        f2 = _bval(kinds[j], params[j], y1, y2) - _bval(kinds[k], params[k], y1, y2)
        if hypot(f1, f2) <= tol:
            return (y1, y2, 1)
        _bgrad(kinds[i], params[i], y1, y2, &gi1, &gi2)
        _bgrad(kinds[j], params[j], y1, y2, &gj1, &gj2)
        _bgrad(kinds[k], params[k], y1, y2, &gk1, &gk2)
        a11 = gi1 - gj1
        a12 = gi2 - gj2
        a21 = gj1 - gk1
        a22 = gj2 - gk2
        det = a11 * a22 - a12 * a21
        if det == 0.0:
            return (y1, y2, 0)
        y1 -= (a22 * f1 - a12 * f2) / det
        y2 -= (a11 * f2 - a21 * f1) / det
    f1 = _bval(kinds[i], params[i], y1, y2) - _bval(kinds[j], params[j], y1, y2)
    f2 = _bval(kinds[j], params[j], y1, y2) - _bval(kinds[k], params[k], y1, y2)
    return (y1, y2, 1 if hypot(f1, f2) <= tol else 0)


def euler_interp(const double[:] knots, const double[:] fvals, double t_end, int m):
    cdef Py_ssize_t n = knots.shape[0]
    cdef double h = t_end / m
    out_arr = np.empty(m + 1)
    cdef double[::1] out = out_arr
    cdef double x = 0.0, f, w
    cdef Py_ssize_t seg = 0, step
    out[0] = 0.0
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
    return out_arr


cdef inline double _decay_rhs(int kind, double y) nogil:
    if kind == 0:
        return -y
    if kind == 1:
        return -y / sqrt(1.0 + y * y)
    return -(2.0 * y + 1.0) / (2.0 * sqrt(y * y + y + 1.0))


def rk4_decay(double y0, double t_end, long n, long stride, int kind):
    cdef double h = t_end / n
    cdef double y = y0, k1, k2, k3, k4
    cdef long n_out = n // stride + 1 + (1 if n % stride != 0 else 0)
    out_arr = np.empty(n_out)
    cdef double[::1] out = out_arr
    cdef long step, pos = 1
    out[0] = y0
    for step in range(1, n + 1):
        k1 = _decay_rhs(kind, y)
        k2 = _decay_rhs(kind, y + 0.5 * h * k1)
        k3 = _decay_rhs(kind, y + 0.5 * h * k2)
        k4 = _decay_rhs(kind, y + h * k3)
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % stride == 0:
            out[pos] = y
            pos += 1
    if n % stride != 0:
        out[pos] = y
    return out_arr
