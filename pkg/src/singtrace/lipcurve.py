"""Lipschitz curve utilities: length, stalls, reparameterization, right ODE.

Sampled curves are polylines, so the supremum-over-partitions length equals
the chord sum and all length bookkeeping is exact. A "stall" is a parameter
interval on which the curve point is constant (within tolerance); stalls
collapse to single samples under arc-length reparameterization, which is
what makes the reparameterized curve move at unit speed.

The forward Euler scheme for a right-continuous, positively bounded slope
field integrates the time-rescaling equation of the tracer; the scheme is
refined by grid doubling until successive iterates are Cauchy in sup norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K

__all__ = [
    "SampledCurve",
    "StallInterval",
    "DegenerateCurveError",
    "ContractViolationError",
    "RefinementError",
    "arc_length",
    "stall_interval",
    "reparam_by_length",
    "euler_right_ode",
    "solve_right_ode",
    "solve_right_ode_interp",
    "has_min_slope",
]


class DegenerateCurveError(ValueError):
    """The curve has zero total length."""


class ContractViolationError(ValueError):
    """The slope field left its declared range [b1, b2]."""


class RefinementError(RuntimeError):
    """Grid doubling failed to become Cauchy within the refinement budget."""


@dataclass(frozen=True)
class SampledCurve:
    """Polyline with strictly increasing parameters and cumulative lengths."""

    params: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.params, dtype=float).reshape(-1)
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(t) != len(pts) or len(t) == 0:
            raise ValueError("params and points must align and be nonempty")
        if len(t) > 1 and not np.all(np.diff(t) > 0.0):
            raise ValueError("params must be strictly increasing")
        chords = np.hypot(*(np.diff(pts, axis=0).T)) if len(pts) > 1 else np.zeros(0)
        cum = np.concatenate([[0.0], np.cumsum(chords)])
        for arr in (t, pts, cum):
            arr.setflags(write=False)
        object.__setattr__(self, "params", t)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "cumlen", cum)

    @property
    def t0(self) -> float:
        return float(self.params[0])

    @property
    def t1(self) -> float:
        return float(self.params[-1])

    def length(self) -> float:
        return float(self.cumlen[-1])

    def point_at(self, t: float) -> np.ndarray:
        """Linear interpolation of the polyline at parameter t."""
        self._check_range(t)
        x = np.interp(t, self.params, self.points[:, 0])
        y = np.interp(t, self.params, self.points[:, 1])
        return np.array([x, y])

    def _check_range(self, t: float):
        slack = 1e-12 * (1.0 + abs(self.t1 - self.t0))
        if t < self.t0 - slack or t > self.t1 + slack:
            raise ValueError(f"parameter {t} outside [{self.t0}, {self.t1}]")


@dataclass(frozen=True)
class StallInterval:
    tau1: float
    tau2: float


def arc_length(c: SampledCurve, t1: float, t2: float) -> float:
    """Length of the curve between parameters t1 <= t2 (chord-sum length)."""
    if t1 > t2:
        raise ValueError("t1 must not exceed t2")
    c._check_range(t1)
    c._check_range(t2)
    l1 = float(np.interp(t1, c.params, c.cumlen))
    l2 = float(np.interp(t2, c.params, c.cumlen))
    return l2 - l1


def _default_stall_eps(c: SampledCurve) -> float:
    lo = c.points.min(axis=0)
    hi = c.points.max(axis=0)
    return 1e-10 * float(np.hypot(*(hi - lo)))


def stall_interval(c: SampledCurve, t: float, eps_stall: float | None = None) -> StallInterval:
    """Maximal parameter interval around t on which the curve is constant.

    Constancy is judged on the samples: the interval extends over contiguous
    samples within eps_stall of the curve point at t.
    """
    c._check_range(t)
    if eps_stall is None:
        eps_stall = _default_stall_eps(c)
    pt = c.point_at(t)
    n = len(c.params)
    j = int(np.searchsorted(c.params, t, side="right") - 1)
    j = min(max(j, 0), n - 1)

    def close(i):
        return float(np.hypot(*(c.points[i] - pt))) <= eps_stall

    tau1 = tau2 = t
    if close(j):
        i = j
        while i - 1 >= 0 and close(i - 1):
            i -= 1
        tau1 = min(t, float(c.params[i]))
    k = j + 1 if c.params[j] < t else j
    if k < n and close(k):
        i = k
        while i + 1 < n and close(i + 1):
            i += 1
        tau2 = max(t, float(c.params[i]))
    elif close(j) and c.params[j] >= t:
        tau2 = max(t, float(c.params[j]))
    return StallInterval(tau1=tau1, tau2=tau2)


def reparam_by_length(c: SampledCurve, eps_stall: float | None = None) -> SampledCurve:
    """Reindex the curve by arc length; stalls collapse to single samples.

    The output parameters are the cumulative chord lengths of the stall-free
    polyline, nudged by at most one ulp per step so that every parameter
    increment is at least its chord; chord/increment ratios then lie in
    [1 - 1e-9, 1] whenever chords exceed ~1e-6 of the total length. Exact
    stalls (repeated points) are removed without changing the length.
    """
    if eps_stall is None:
        eps_stall = _default_stall_eps(c)
    pts = c.points
    kept = [0]
    for i in range(1, len(pts)):
        if float(np.hypot(*(pts[i] - pts[kept[-1]]))) > eps_stall:
            kept.append(i)
    kpts = pts[kept]
    if len(kpts) < 2:
        raise DegenerateCurveError("curve has zero length after stall collapse")
    chords = np.hypot(*(np.diff(kpts, axis=0).T))
    s = np.empty(len(kpts))
    s[0] = 0.0
    for k, ch in enumerate(chords):
        val = s[k] + ch
        while val - s[k] < ch:
            val = np.nextafter(val, np.inf)
        while True:
            down = np.nextafter(val, -np.inf)
            if down - s[k] >= ch:
                val = down
            else:
                break
        s[k + 1] = val
    return SampledCurve(params=s, points=kpts)


def euler_right_ode(f, a: float, b1: float, b2: float, m: int):
    """Forward Euler for xdot = f(x), x(0) = 0 on the uniform grid of [0, a/b2].

    ``f`` must be right-continuous with values in [b1, b2] on [0, a]; every
    evaluation is range-checked. Returns (t_grid, x_values); the output is
    b1-increasing and b2-Lipschitz for every m.
    """
    if not (0.0 < b1 <= b2 < np.inf):
        raise ValueError("need 0 < b1 <= b2 < inf")
    if a <= 0.0 or m < 1:
        raise ValueError("need a > 0 and m >= 1")
    t_end = a / b2
    h = t_end / m
    slack = 1e-12 * (1.0 + b2)
    xs = np.empty(m + 1)
    xs[0] = 0.0
    x = 0.0
    for i in range(m):
        fx = float(f(x))
        if fx < b1 - slack or fx > b2 + slack:
            raise ContractViolationError(
                f"f({x}) = {fx} outside [{b1}, {b2}]"
            )
        x += h * fx
        xs[i + 1] = x
    return np.linspace(0.0, t_end, m + 1), xs


def solve_right_ode(f, a, b1, b2, tol: float = 1e-8, m0: int = 8, max_doublings: int = 26):
    """Refine the Euler scheme by grid doubling until sup-norm Cauchy.

    Returns (t_grid, x_values, m_final, last_gap). Raises RefinementError if
    successive iterates never get within tol of each other.
    """
    m = int(m0)
    t, x = euler_right_ode(f, a, b1, b2, m)
    for _ in range(max_doublings):
        t2, x2 = euler_right_ode(f, a, b1, b2, 2 * m)
        gap = float(np.max(np.abs(x2[::2] - x)))
        t, x, m = t2, x2, 2 * m
        if gap < tol:
            return t, x, m, gap
    raise RefinementError(
        f"Euler refinement not Cauchy at tol {tol} after m={m} (gap {gap:.3e})"
    )


def solve_right_ode_interp(
    knots, fvals, b1, b2, tol: float = 1e-8, m0: int = 8, max_doublings: int = 26
):
    """Kernel-backed variant for a piecewise-linear slope field.

    ``knots``/``fvals`` sample f on [0, a] with knots[0] = 0 and knots[-1] = a;
    values must already lie in [b1, b2]. Semantics match
    ``solve_right_ode(interp, a, b1, b2, ...)`` with the linear interpolant.
    """
    knots = np.ascontiguousarray(knots, dtype=float)
    fvals = np.ascontiguousarray(fvals, dtype=float)
    if len(knots) != len(fvals) or len(knots) < 1:
        raise ValueError("knots and fvals must align and be nonempty")
    if np.any(fvals < b1 - 1e-12 * (1.0 + b2)) or np.any(fvals > b2 + 1e-12 * (1.0 + b2)):
        raise ContractViolationError("sampled slope values outside [b1, b2]")
    a = float(knots[-1])
    t_end = a / b2
    m = int(m0)
    x = K.euler_interp(knots, fvals, t_end, m)
    for _ in range(max_doublings):
        x2 = K.euler_interp(knots, fvals, t_end, 2 * m)
        gap = float(np.max(np.abs(x2[::2] - x)))
        x, m = x2, 2 * m
        if gap < tol:
            return np.linspace(0.0, t_end, m + 1), x, m, gap
    raise RefinementError(
        f"Euler refinement not Cauchy at tol {tol} after m={m} (gap {gap:.3e})"
    )


def has_min_slope(t, x, b: float, slack: float = 1e-12) -> bool:
    """True iff x(t2) >= x(t1) + b (t2 - t1) - slack for all sample pairs.

    Equivalent to z = x - b t being nondecreasing within slack, checked
    against the running maximum.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    z = x - b * t
    return bool(np.all(z >= np.maximum.accumulate(z) - slack))
