"""Inverse of the superdifferential graph map for normalized problems.

After the quadratic-shift normalization every sheet w_i = u_i - f is
uniformly concave, so for a slope p the landscape

    y  ->  min_i w_i(y) - <p, y>

has a unique maximizer x(p), and p belongs to the shifted superdifferential
at x(p). The maximizer is located by exact enumeration: each sheet's
critical point (closed form per branch kind), the constrained maximum on
each pairwise sheet-crossing curve (damped Newton on the stationarity
system), and triple-junction points. The best candidate is then validated
by checking that p really lies in the superdifferential at the result;
failures raise instead of extrapolating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .geometry2d import as_vec2, project
from .semiconcave import NormalizedProblem, active_set

__all__ = [
    "GradientPoint",
    "NonconvergenceError",
    "NotInImageError",
    "point_for_gradient",
    "in_singular_gradient_set",
    "check_bilipschitz",
    "BiLipschitzReport",
]


class NonconvergenceError(RuntimeError):
    """No candidate maximizer converged inside the domain."""


class NotInImageError(RuntimeError):
    """The slope is not (numerically) in the image of the gradient graph."""


@dataclass(frozen=True)
class GradientPoint:
    """Result of inverting the gradient graph at a slope p."""

    p: np.ndarray
    x: np.ndarray
    active: tuple
    converged: bool
    residual: float


def _membership_residual(prob: NormalizedProblem, x, p) -> tuple[float, tuple]:
    idx = active_set(prob.base, x)
    Kw = prob.w_superdifferential(x)
    q = project(Kw, p)
    return float(np.hypot(*(q - p))), tuple(idx)


def point_for_gradient(
    prob: NormalizedProblem,
    p,
    x_hint=None,
    membership_tol: float | None = None,
    newton_tol: float = 1e-12,
    max_iter: int = 60,
) -> GradientPoint:
    """Unique maximizer x(p) of the landscape min_i w_i(y) - <p, y>.

    ``x_hint`` warm-starts the crossing-curve solves (the tracer steps are
    tiny, so the previous point is an excellent start). The default
    membership tolerance is ``1e-7 * (1 + |p|)``.

    Raises NonconvergenceError when no candidate lands in the domain and
    NotInImageError when the best candidate fails the membership check.
    """
    p = as_vec2(p)
    if membership_tol is None:
        membership_tol = 1e-7 * (1.0 + float(np.hypot(*p)))
    kinds, params = prob.base.packed
    c1 = prob.c1
    dom = prob.base.domain
    n = len(kinds)

    candidates: list[tuple[float, float, float]] = []

    def consider(y1: float, y2: float):
        if not (math.isfinite(y1) and math.isfinite(y2)):
            return
        if math.hypot(y1 - dom.center[0], y2 - dom.center[1]) >= dom.radius:
            return
        obj = K.sheet_obj(kinds, params, c1, y1, y2, p[0], p[1])
        candidates.append((obj, y1, y2))

    per_branch: list[tuple[float, float] | None] = []
    for i in range(n):
        y1, y2, ok = K.sheet_argmax(kinds, params, c1, i, p[0], p[1])
        if ok:
            per_branch.append((y1, y2))
            consider(y1, y2)
        else:
            per_branch.append(None)

    for i in range(n):
        for j in range(i + 1, n):
            if x_hint is not None:
                y0 = (float(x_hint[0]), float(x_hint[1]))
            elif per_branch[i] and per_branch[j]:
                y0 = (
                    0.5 * (per_branch[i][0] + per_branch[j][0]),
                    0.5 * (per_branch[i][1] + per_branch[j][1]),
                )
            elif per_branch[i]:
                y0 = per_branch[i]
            elif per_branch[j]:
                y0 = per_branch[j]
            else:
                y0 = (dom.center[0], dom.center[1])
            y1, y2, lam, ok = K.ridge_argmax(
                kinds, params, c1, i, j, p[0], p[1], y0[0], y0[1], 0.5,
                newton_tol, max_iter,
            )
            # keep converged points even when the multiplier leaves [0, 1];
            # the objective comparison and membership check arbitrate
            if ok:
                consider(y1, y2)

    if n >= 3:
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    if x_hint is not None:
                        y0 = (float(x_hint[0]), float(x_hint[1]))
                    else:
                        y0 = (dom.center[0], dom.center[1])
                    y1, y2, ok = K.triple_point(
                        kinds, params, i, j, k, y0[0], y0[1], newton_tol, max_iter
                    )
                    if ok:
                        consider(y1, y2)

    if not candidates:
        raise NonconvergenceError(
            f"no landscape maximizer candidate inside the domain for p={p}"
        )
    obj, y1, y2 = max(candidates, key=lambda c: c[0])
    x = np.array([y1, y2])
    residual, idx = _membership_residual(prob, x, p)
    if residual > membership_tol:
        raise NotInImageError(
            f"slope p={p} not in the gradient image: residual {residual:.3e} "
            f"at x={x} (tol {membership_tol:.3e})"
        )
    return GradientPoint(p=p, x=x, active=idx, converged=True, residual=residual)


def in_singular_gradient_set(
    prob: NormalizedProblem, p, tol: float = 1e-9, **kwargs
) -> bool:
    """True iff the transformed Hamiltonian is strictly negative at (x(p), p).

    The set of such slopes is open and its image under x(.) is exactly the
    singular set, so this is a robust membership test for slopes whose point
    carries a nontrivial superdifferential.
    """
    gp = point_for_gradient(prob, p, **kwargs)
    hval = prob.h_tilde(gp.x, gp.p, prob.w_value(gp.x))
    return hval < -tol


@dataclass(frozen=True)
class BiLipschitzReport:
    n_pairs: int
    max_contraction_violation: float
    max_monotonicity_violation: float

    @property
    def ok(self) -> bool:
        return (
            self.max_contraction_violation <= 1e-8
            and self.max_monotonicity_violation <= 1e-8
        )


def check_bilipschitz(prob: NormalizedProblem, pairs) -> BiLipschitzReport:
    """Check the inverse-map inequalities on slope pairs.

    For each pair (p1, p2) with points x1 = x(p1), x2 = x(p2):

        |x2 - x1| <= |p2 - p1|                (1-Lipschitz inverse)
        <p2 - p1, x2 - x1> <= -|x2 - x1|^2    (uniform monotonicity)

    Returns the maximal violations over all pairs.
    """
    worst_lip = -np.inf
    worst_mono = -np.inf
    count = 0
    for p1, p2 in pairs:
        x1 = point_for_gradient(prob, p1).x
        x2 = point_for_gradient(prob, p2).x
        dx = float(np.hypot(*(x2 - x1)))
        dp = float(np.hypot(*(as_vec2(p2) - as_vec2(p1))))
        worst_lip = max(worst_lip, dx - dp)
        mono = float((as_vec2(p2) - as_vec2(p1)) @ (x2 - x1)) + dx * dx
        worst_mono = max(worst_mono, mono)
        count += 1
    return BiLipschitzReport(
        n_pairs=count,
        max_contraction_violation=float(worst_lip),
        max_monotonicity_violation=float(worst_mono),
    )
