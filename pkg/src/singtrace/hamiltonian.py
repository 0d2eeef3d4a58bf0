"""Quadratic-form Hamiltonians and the minimizing gradient selection.

H(x, p, u) = 1/2 <A p, p> + beta * u + g(x) with A symmetric positive
definite, so H is strictly convex in p and the minimizer over any compact
convex set is unique. Over a polytope the minimization is closed-form: the
unconstrained minimizer is p = 0, and otherwise the restriction to each edge
is a one-dimensional quadratic solved by projection in the A-inner product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry2d import ConvexPolytope2, Face, as_vec2, contains, exposed_face

__all__ = [
    "Hamiltonian",
    "Selection",
    "DegenerateFaceError",
    "h_eval",
    "minimal_selection",
    "face_endpoints",
    "is_critical",
]


class DegenerateFaceError(RuntimeError):
    """The exposed face in the velocity direction collapsed to a point."""


@dataclass(frozen=True)
class Hamiltonian:
    """H(x, p, u) = 1/2 <A p, p> + beta u + g(x).

    ``g_poly`` holds the coefficients of g as a polynomial in x up to degree
    two, ordered (1, x1, x2, x1^2, x1 x2, x2^2).
    """

    A: np.ndarray
    beta: float = 0.0
    g_poly: tuple = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    kind = "quadratic_form"

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float).reshape(2, 2)
        if abs(A[0, 1] - A[1, 0]) > 1e-12 * (1.0 + np.abs(A).max()):
            raise ValueError("A must be symmetric")
        A = 0.5 * (A + A.T)
        if np.linalg.eigvalsh(A).min() <= 0.0:
            raise ValueError("A must be positive definite")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "beta", float(self.beta))
        g = tuple(float(c) for c in self.g_poly)
        if len(g) > 6:
            raise ValueError("g_poly takes at most 6 coefficients")
        g = g + (0.0,) * (6 - len(g))
        object.__setattr__(self, "g_poly", g)

    def g_value(self, x) -> float:
        x = as_vec2(x)
        c = self.g_poly
        return float(
            c[0]
            + c[1] * x[0]
            + c[2] * x[1]
            + c[3] * x[0] * x[0]
            + c[4] * x[0] * x[1]
            + c[5] * x[1] * x[1]
        )

    def value(self, x, p, uval: float) -> float:
        p = as_vec2(p)
        return 0.5 * float(p @ self.A @ p) + self.beta * float(uval) + self.g_value(x)

    def grad_p(self, p) -> np.ndarray:
        return self.A @ as_vec2(p)


@dataclass(frozen=True)
class Selection:
    """Minimizer of H over a superdifferential, with its velocity and value.

    ``face`` is the exposed face of the polytope in the velocity direction
    (None when the velocity is below the degeneracy tolerance).
    """

    p: np.ndarray
    v: np.ndarray
    h_value: float
    face: Face | None = None


def h_eval(H: Hamiltonian, x, p, uval: float) -> float:
    """Value of the Hamiltonian at (x, p, uval)."""
    return H.value(x, p, uval)


def minimal_selection(
    H: Hamiltonian, x, uval: float, K: ConvexPolytope2, tol: float = 1e-9
) -> Selection:
    """Unique minimizer of p -> H(x, p, uval) over the polytope K.

    The unconstrained minimizer of the quadratic form is the origin; if it
    lies in K it wins, otherwise each edge is minimized in closed form and
    the best edge point is returned. Strict convexity makes the result
    independent of the edge scan order.
    """
    x = as_vec2(x)
    verts = K.vertices
    A = H.A
    if K.n == 1:
        p = verts[0].copy()
    elif contains(K, (0.0, 0.0), tol):
        p = np.zeros(2)
    else:
        best = None
        best_q = np.inf
        for i, j in K.edges():
            a, b = verts[i], verts[j]
            d = b - a
            dAd = float(d @ A @ d)
            if dAd <= 0.0:
                t = 0.0
            else:
                t = -float(a @ A @ d) / dAd
                t = min(1.0, max(0.0, t))
            cand = a + t * d
            q = float(cand @ A @ cand)
            if q < best_q - 0.0:
                best_q = q
                best = cand
        p = best
    v = H.grad_p(p)
    face = None
    if float(np.hypot(*v)) > tol:
        face = exposed_face(K, v, tol)
    return Selection(p=p, v=v, h_value=H.value(x, p, uval), face=face)


def face_endpoints(K: ConvexPolytope2, v, tol: float = 1e-9):
    """Endpoints (p1, p2) of the exposed face of K in direction v.

    Ordered so that (p2 - p1, v) is positively oriented. Raises
    DegenerateFaceError when the face is a single vertex, which signals that
    the point is effectively nonsingular in the v direction.
    """
    v = as_vec2(v)
    if float(np.hypot(*v)) <= tol:
        raise ValueError("velocity direction too small for a face query")
    face = exposed_face(K, v, tol)
    if face.kind == "point":
        raise DegenerateFaceError(
            f"exposed face in direction {v} is the single vertex {face.endpoints[0]}"
        )
    if face.kind == "whole":
        # only reachable for a segment polytope orthogonal to v
        if K.n != 2:
            raise DegenerateFaceError("whole-polytope face for a polygon")
        p1, p2 = K.vertices[0].copy(), K.vertices[1].copy()
    else:
        p1, p2 = face.endpoints
        p1, p2 = p1.copy(), p2.copy()
    d = p2 - p1
    if d[0] * v[1] - d[1] * v[0] <= 0.0:
        p1, p2 = p2, p1
    return p1, p2


def is_critical(sel: Selection, v_min: float) -> bool:
    """True iff the selection velocity magnitude is at most v_min."""
    return float(np.hypot(*sel.v)) <= v_min
