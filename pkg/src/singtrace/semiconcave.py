"""Semiconcave functions represented as pointwise minima of smooth branches.

A function u = min_i u_i over an open disk, with each branch one of three
closed-form kinds (quadratic, cone, affine), is semiconcave with a constant
bounded by the largest branch Hessian eigenvalue. Because the representation
is finite, the superdifferential at any point is the convex hull of the
active branch gradients and every object here is computable exactly: values,
active sets, reachable gradients, singularity tests, and the quadratic-shift
normalization that makes the function uniformly concave.

Instances are immutable after construction; all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .geometry2d import ConvexPolytope2, as_vec2, diameter, hull

__all__ = [
    "QuadraticBranch",
    "ConeBranch",
    "AffineBranch",
    "Domain",
    "MinFunction",
    "NormalizedProblem",
    "DomainError",
    "pack_branches",
    "evaluate",
    "active_set",
    "superdifferential",
    "reachable_gradients",
    "is_singular",
    "estimate_semiconcavity",
    "normalize",
]


class DomainError(ValueError):
    """Raised when a query point lies outside the problem domain."""


@dataclass(frozen=True)
class QuadraticBranch:
    """u(x) = -1/2 <Q (x - b), x - b> + d with Q symmetric positive semidefinite."""

    Q: np.ndarray
    b: np.ndarray
    d: float
    kind = "quadratic"

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float).reshape(2, 2)
        if abs(Q[0, 1] - Q[1, 0]) > 1e-12 * (1.0 + np.abs(Q).max()):
            raise ValueError("curvature matrix must be symmetric")
        if np.linalg.eigvalsh(Q).min() < -1e-12:
            raise ValueError("curvature matrix must be positive semidefinite")
        Q = 0.5 * (Q + Q.T)
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", as_vec2(self.b))
        object.__setattr__(self, "d", float(self.d))

    def value(self, x):
        z = as_vec2(x) - self.b
        return -0.5 * float(z @ self.Q @ z) + self.d

    def grad(self, x):
        return -(self.Q @ (as_vec2(x) - self.b))

    def hess(self, x):
        return -self.Q


@dataclass(frozen=True)
class ConeBranch:
    """u(x) = d - c |x - apex| with c > 0; only valid at distance >= r from the apex."""

    apex: np.ndarray
    c: float
    d: float
    r: float
    kind = "cone"

    def __post_init__(self):
        object.__setattr__(self, "apex", as_vec2(self.apex))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "r", float(self.r))
        if self.c <= 0.0:
            raise ValueError("cone slope must be positive")
        if self.r <= 0.0:
            raise ValueError("cone exclusion radius must be positive")

    def value(self, x):
        z = as_vec2(x) - self.apex
        return self.d - self.c * float(np.hypot(*z))

    def grad(self, x):
        z = as_vec2(x) - self.apex
        return -self.c * z / float(np.hypot(*z))

    def hess(self, x):
        z = as_vec2(x) - self.apex
        n2 = float(z @ z)
        n = np.sqrt(n2)
        return -(self.c / n) * (np.eye(2) - np.outer(z, z) / n2)


@dataclass(frozen=True)
class AffineBranch:
    """u(x) = <g, x> + d."""

    g: np.ndarray
    d: float
    kind = "affine"

    def __post_init__(self):
        object.__setattr__(self, "g", as_vec2(self.g))
        object.__setattr__(self, "d", float(self.d))

    def value(self, x):
        return float(self.g @ as_vec2(x)) + self.d

    def grad(self, x):
        return self.g.copy()

    def hess(self, x):
        return np.zeros((2, 2))


@dataclass(frozen=True)
class Domain:
    """Open disk."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec2(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if self.radius <= 0.0:
            raise ValueError("domain radius must be positive")

    def contains(self, x) -> bool:
        return float(np.hypot(*(as_vec2(x) - self.center))) < self.radius


def pack_branches(branches):
    """Flat (kinds, params) encoding shared with the kernel backends."""
    kinds = np.zeros(len(branches), dtype=np.int8)
    params = np.zeros((len(branches), 6))
    for i, br in enumerate(branches):
        if br.kind == "quadratic":
            kinds[i] = 0
            params[i] = (br.Q[0, 0], br.Q[0, 1], br.Q[1, 1], br.b[0], br.b[1], br.d)
        elif br.kind == "cone":
            kinds[i] = 1
            params[i] = (br.apex[0], br.apex[1], br.c, br.d, br.r, 0.0)
        else:
            kinds[i] = 2
            params[i] = (br.g[0], br.g[1], br.d, 0.0, 0.0, 0.0)
    kinds.setflags(write=False)
    params.setflags(write=False)
    return kinds, params


@dataclass(frozen=True)
class MinFunction:
    """u = min_i u_i over an open disk domain.

    ``semiconcavity`` is an upper bound for the largest branch Hessian
    eigenvalue on the domain; set it explicitly or via
    :func:`estimate_semiconcavity`. Cone apex exclusion balls must be
    disjoint from the domain so every branch is twice differentiable on it.
    """

    branches: tuple
    domain: Domain
    semiconcavity: float | None = None

    def __post_init__(self):
        branches = tuple(self.branches)
        if not branches:
            raise ValueError("need at least one branch")
        for br in branches:
            if br.kind == "cone":
                gap = float(np.hypot(*(br.apex - self.domain.center)))
                if gap < self.domain.radius + br.r:
                    raise ValueError(
                        "cone exclusion ball intersects the domain "
                        f"(apex {br.apex}, r={br.r})"
                    )
        object.__setattr__(self, "branches", branches)
        kinds, params = pack_branches(branches)
        object.__setattr__(self, "_kinds", kinds)
        object.__setattr__(self, "_params", params)

    @property
    def packed(self):
        return self._kinds, self._params

    def with_semiconcavity(self, value: float) -> "MinFunction":
        return MinFunction(self.branches, self.domain, float(value))


def _require_inside(u: MinFunction, x):
    x = as_vec2(x)
    if not u.domain.contains(x):
        raise DomainError(f"point {x} outside domain")
    return x


def _default_gap_tol(uval: float) -> float:
    return 1e-9 * (1.0 + abs(uval))


def evaluate(u: MinFunction, x) -> float:
    """min_i u_i(x); raises DomainError outside the domain."""
    x = _require_inside(u, x)
    return K.min_value(u._kinds, u._params, x[0], x[1])


def active_set(u: MinFunction, x, gap_tol: float | None = None) -> list[int]:
    """Indices of branches within gap_tol of the minimum at x.

    The default tolerance is ``1e-9 * (1 + |u(x)|)``; near-ties count as
    active, which can only enlarge the superdifferential.
    """
    x = _require_inside(u, x)
    val = K.min_value(u._kinds, u._params, x[0], x[1])
    if gap_tol is None:
        gap_tol = _default_gap_tol(val)
    return K.active_indices(u._kinds, u._params, x[0], x[1], gap_tol)


def superdifferential(
    u: MinFunction, x, gap_tol: float | None = None
) -> ConvexPolytope2:
    """Superdifferential at x: convex hull of the active branch gradients."""
    x = _require_inside(u, x)
    idx = active_set(u, x, gap_tol)
    grads = [K.branch_grad(u._kinds, u._params, i, x[0], x[1]) for i in idx]
    return hull(np.asarray(grads))


def reachable_gradients(u: MinFunction, x, gap_tol: float | None = None):
    """Extreme points of the superdifferential (the reachable gradients)."""
    Kp = superdifferential(u, x, gap_tol)
    return [v.copy() for v in Kp.vertices]


def is_singular(u: MinFunction, x, diam_tol: float = 1e-9) -> bool:
    """True iff the superdifferential has diameter above diam_tol."""
    return diameter(superdifferential(u, x)) > diam_tol


def estimate_semiconcavity(u: MinFunction, grid_n: int = 32) -> float:
    """Largest branch Hessian eigenvalue over a grid_n x grid_n domain sample.

    Clamped below at 0. Any value at or above this bound is a valid
    semiconcavity constant for the min function on the domain.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    c = u.domain.center
    r = u.domain.radius
    ticks = np.linspace(-r, r, grid_n)
    worst = 0.0
    for dx in ticks:
        for dy in ticks:
            if dx * dx + dy * dy >= r * r:
                continue
            x = c + (dx, dy)
            for br in u.branches:
                lam = float(np.linalg.eigvalsh(br.hess(x)).max())
                if lam > worst:
                    worst = lam
    return worst


@dataclass(frozen=True)
class NormalizedProblem:
    """Quadratic-shift normalization making the function uniformly concave.

    With f(x) = c1/2 |x|^2 and c1 = semiconcavity + 1, the shifted function
    w = u - f has all sheet Hessian eigenvalues <= -1, the singular set is
    unchanged, superdifferentials translate vertex-by-vertex by Df(x) = c1 x,
    and the velocity of the minimal selection is preserved under the
    transformed Hamiltonian handle ``h_tilde``.
    """

    base: MinFunction
    hamiltonian: object
    c1: float

    def shift_value(self, x) -> float:
        x = as_vec2(x)
        return 0.5 * self.c1 * float(x @ x)

    def shift_grad(self, x) -> np.ndarray:
        return self.c1 * as_vec2(x)

    def w_value(self, x) -> float:
        return evaluate(self.base, x) - self.shift_value(x)

    def w_superdifferential(
        self, x, gap_tol: float | None = None
    ) -> ConvexPolytope2:
        Ku = superdifferential(self.base, x, gap_tol)
        return ConvexPolytope2(Ku.vertices - self.shift_grad(x))

    def h_tilde(self, x, p, wval: float) -> float:
        x = as_vec2(x)
        return self.hamiltonian.value(
            x, as_vec2(p) + self.shift_grad(x), wval + self.shift_value(x)
        )


def normalize(u: MinFunction, H) -> NormalizedProblem:
    """Normalized problem for u (requires its semiconcavity bound to be set)."""
    if u.semiconcavity is None:
        raise ValueError("semiconcavity bound not set; estimate or declare it")
    return NormalizedProblem(base=u, hamiltonian=H, c1=u.semiconcavity + 1.0)
