"""Exact planar convex geometry for small polytopes.

Superdifferentials of min-of-branches functions are convex polytopes with a
handful of vertices (a point, a segment, or a small polygon). This module
provides the hull construction and the face/projection queries the rest of
the library relies on. All polytopes are stored as counterclockwise vertex
rings; degenerate cases (single point, segment) are first-class citizens.

All values are immutable after construction and every operation is pure, so
the module is safe for concurrent use without synchronization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConvexPolytope2",
    "Face",
    "hull",
    "exposed_face",
    "extreme_points",
    "project",
    "contains",
    "diameter",
    "as_vec2",
]


def as_vec2(p) -> np.ndarray:
    """Coerce to a finite float vector of shape (2,)."""
    v = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite coordinates: {v}")
    return v


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class ConvexPolytope2:
    """Convex polytope in the plane: vertices in counterclockwise order.

    A single point and a two-vertex segment are allowed. For polygons the
    vertex ring has positive signed area and no three consecutive collinear
    vertices. Construct general point sets through :func:`hull`.
    """

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        if v.shape[0] < 1:
            raise ValueError("polytope needs at least one vertex")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite vertex coordinates")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        if len(v) >= 3:
            area2 = 0.0
            for i in range(len(v)):
                area2 += _cross((0.0, 0.0), v[i], v[(i + 1) % len(v)])
            if area2 <= 0.0:
                raise ValueError("polygon vertices must be counterclockwise")

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edges(self):
        """Yield vertex index pairs (i, j) of the boundary edges."""
        m = self.n
        if m == 1:
            return
        if m == 2:
            yield (0, 1)
            return
        for i in range(m):
            yield (i, (i + 1) % m)


@dataclass(frozen=True)
class Face:
    """Exposed face of a polytope: a vertex, an edge, or the whole set."""

    kind: str  # "point" | "segment" | "whole"
    endpoints: tuple
    vertex_indices: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in ("point", "segment", "whole"):
            raise ValueError(f"bad face kind {self.kind!r}")
        object.__setattr__(
            self, "endpoints", tuple(as_vec2(e) for e in self.endpoints)
        )


def _dedup(pts: np.ndarray, tol: float) -> np.ndarray:
    out = np.empty_like(pts)
    m = 0
    for p in pts:
        if m == 0 or float(
            np.min(np.hypot(out[:m, 0] - p[0], out[:m, 1] - p[1]))
        ) > tol:
            out[m] = p
            m += 1
    return out[:m]


def hull(points, dedup_tol: float | None = None) -> ConvexPolytope2:
    """Convex hull of a finite point set, counterclockwise.

    Points within ``dedup_tol`` of an earlier point are merged (default
    ``1e-10 * (1 + max coordinate magnitude)``). Collinear interior points
    are dropped using a cross-product threshold of ``1e-12 * scale**2``.
    Hull vertices are always a subset of the (deduplicated) input points.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("hull of empty point set")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite input point")
    scale = 1.0 + float(np.max(np.abs(pts)))
    if dedup_tol is None:
        dedup_tol = 1e-10 * scale
    pts = _dedup(pts, dedup_tol)
    if len(pts) == 1:
        return ConvexPolytope2(pts)

    eps = 1e-12 * scale * scale
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    spts = pts[order]

    def chain(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= eps:
                out.pop()
            out.append(p)
        return out

    lower = chain(spts)
    upper = chain(spts[::-1])
    ring = lower[:-1] + upper[:-1]
    if len(ring) < 2:
        # all points collinear: keep the two lexicographic extremes
        ring = [spts[0], spts[-1]]
    return ConvexPolytope2(np.asarray(ring))


def exposed_face(K: ConvexPolytope2, theta, tol: float = 1e-12) -> Face:
    """Subset of K minimizing the linear functional <., theta>.

    A zero direction (``|theta| <= tol``) exposes the whole set. The result
    is invariant under positive rescaling of ``theta``. Vertices whose score
    ties the minimum within ``tol`` (after normalizing ``theta`` to unit
    length) are treated as exposed, so near-ties resolve to the full edge.
    """
    th = as_vec2(theta)
    nrm = float(np.hypot(th[0], th[1]))
    if nrm <= tol:
        eps = extreme_points(K)
        return Face("whole", tuple(eps), tuple(range(K.n)))
    th = th / nrm
    verts = K.vertices
    scores = verts @ th
    m = float(scores.min())
    idx = [i for i, s in enumerate(scores) if s <= m + tol]
    if len(idx) == 1:
        i = idx[0]
        return Face("point", (verts[i],), (i,))
    # keep the two tied vertices furthest apart (the exposed edge endpoints)
    best = (idx[0], idx[1])
    if len(idx) > 2:
        dmax = -1.0
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                d = float(np.hypot(*(verts[idx[a]] - verts[idx[b]])))
                if d > dmax:
                    dmax = d
                    best = (idx[a], idx[b])
    i, j = best
    return Face("segment", (verts[i], verts[j]), (i, j))


def extreme_points(K: ConvexPolytope2) -> list[np.ndarray]:
    """Extreme points of the polytope (exactly its vertex list)."""
    return [v.copy() for v in K.vertices]


def _project_segment(a, b, p):
    ab = b - a
    denom = float(ab @ ab)
    if denom <= 0.0:
        return a.copy()
    t = float((p - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    return a + t * ab


def project(K: ConvexPolytope2, p) -> np.ndarray:
    """Euclidean nearest point of K to p (unique by convexity)."""
    p = as_vec2(p)
    verts = K.vertices
    if K.n == 1:
        return verts[0].copy()
    if K.n == 2:
        return _project_segment(verts[0], verts[1], p)
    inside = True
    for i, j in K.edges():
        if _cross(verts[i], verts[j], p) < 0.0:
            inside = False
            break
    if inside:
        return p.copy()
    best = None
    dbest = np.inf
    for i, j in K.edges():
        q = _project_segment(verts[i], verts[j], p)
        d = float(np.hypot(*(q - p)))
        if d < dbest:
            dbest = d
            best = q
    return best


def contains(K: ConvexPolytope2, p, tol: float = 1e-12) -> bool:
    """True iff p lies within distance tol of K."""
    p = as_vec2(p)
    q = project(K, p)
    return float(np.hypot(*(q - p))) <= tol


def diameter(K: ConvexPolytope2) -> float:
    """Maximum pairwise vertex distance (0 for a single point)."""
    verts = K.vertices
    if K.n == 1:
        return 0.0
    d = 0.0
    for a in range(K.n):
        for b in range(a + 1, K.n):
            d = max(d, float(np.hypot(*(verts[a] - verts[b]))))
    return d
