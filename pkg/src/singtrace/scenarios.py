"""Built-in scenes with closed-form singular sets and independent oracles.

Each scenario bundles a min-of-branches solution, its Hamiltonian, a start
point on the known singular set, and a reference-curve generator that is
independent of the tracing pipeline (closed form where available, otherwise
fixed-step RK4 on the known velocity field restricted to the singular set).

    quad2   paraboloid pair, u-coupled Hamiltonian; singular set = vertical
            axis, characteristic (0, y0 e^{-t})
    eik2    two negative cones, eikonal Hamiltonian; singular set = vertical
            axis, radial speed y / sqrt(1 + y^2)
    eik3    three negative cones at an equilateral triangle; singular set =
            three rays meeting at the circumcenter, critical at the junction
    aniso2  anisotropic variant of quad2 (A = diag(2,1), curvature A^{-1});
            same closed-form characteristic
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .geometry2d import as_vec2
from .hamiltonian import Hamiltonian
from .lipcurve import SampledCurve
from .semiconcave import ConeBranch, Domain, MinFunction, QuadraticBranch

__all__ = ["Scenario", "catalog", "get", "oracle_curve"]

_TRIANGLE_ANGLES = np.deg2rad([90.0, 210.0, 330.0])
_TRIANGLE_SITES = np.stack(
    [np.cos(_TRIANGLE_ANGLES), np.sin(_TRIANGLE_ANGLES)], axis=1
)


@dataclass(frozen=True)
class Scenario:
    id: str
    description: str
    u: MinFunction
    H: Hamiltonian
    x0: np.ndarray
    singular_set: str
    oracle_kind: int  # rk4_decay kind; closed form used where exact
    h_margin: float  # -h exceeds this at the traced singular points
    diam_floor: float

    def on_singular_set(self, x, tol: float = 1e-9) -> bool:
        x = as_vec2(x)
        if self.id in ("quad2", "eik2", "aniso2"):
            return abs(x[0]) <= tol and self.u.domain.contains(x)
        # eik3: distance to the nearest of the three junction rays
        best = np.inf
        for a in _TRIANGLE_SITES:
            s = float(x @ a)
            s = max(s, 0.0)
            best = min(best, float(np.hypot(*(x - s * a))))
        return best <= tol and self.u.domain.contains(x)


def _quad2() -> Scenario:
    u = MinFunction(
        branches=(
            QuadraticBranch(np.eye(2), (1.0, 0.0), 0.0),
            QuadraticBranch(np.eye(2), (-1.0, 0.0), 0.0),
        ),
        domain=Domain((0.0, 0.45), 1.7),
        semiconcavity=0.0,
    )
    return Scenario(
        id="quad2",
        description="two paraboloid branches, H = |p|^2/2 + u; singular axis x1=0",
        u=u,
        H=Hamiltonian(A=np.eye(2), beta=1.0),
        x0=np.array([0.0, 1.0]),
        singular_set="the vertical axis {x1 = 0}",
        oracle_kind=0,
        h_margin=0.4,
        diam_floor=1.9,
    )


def _eik2() -> Scenario:
    u = MinFunction(
        branches=(
            ConeBranch((1.0, 0.0), 1.0, 0.0, 0.1),
            ConeBranch((-1.0, 0.0), 1.0, 0.0, 0.1),
        ),
        domain=Domain((0.0, 0.5), 0.85),
        semiconcavity=0.0,
    )
    return Scenario(
        id="eik2",
        description="two negative cones, H = (|p|^2 - 1)/2; singular axis x1=0",
        u=u,
        H=Hamiltonian(A=np.eye(2), beta=0.0, g_poly=(-0.5,)),
        x0=np.array([0.0, 1.0]),
        singular_set="the vertical axis {x1 = 0}",
        oracle_kind=1,
        h_margin=0.2,
        diam_floor=0.1,
    )


def _eik3() -> Scenario:
    u = MinFunction(
        branches=tuple(
            ConeBranch(site, 1.0, 0.0, 0.1) for site in _TRIANGLE_SITES
        ),
        domain=Domain((0.0, 0.0), 0.85),
        semiconcavity=0.0,
    )
    return Scenario(
        id="eik3",
        description="three negative cones on an equilateral triangle; Y junction",
        u=u,
        H=Hamiltonian(A=np.eye(2), beta=0.0, g_poly=(-0.5,)),
        x0=np.array([0.0, 0.4]),
        singular_set="three rays from the circumcenter toward the sites",
        oracle_kind=2,
        h_margin=0.1,
        diam_floor=0.5,
    )


def _aniso2() -> Scenario:
    Ainv = np.diag([0.5, 1.0])
    u = MinFunction(
        branches=(
            QuadraticBranch(Ainv, (1.0, 0.0), 0.0),
            QuadraticBranch(Ainv, (-1.0, 0.0), 0.0),
        ),
        domain=Domain((0.0, 0.4), 1.3),
        semiconcavity=0.0,
    )
    return Scenario(
        id="aniso2",
        description="anisotropic paraboloid pair, H = <Ap,p>/2 + u, A = diag(2,1)",
        u=u,
        H=Hamiltonian(A=np.diag([2.0, 1.0]), beta=1.0),
        x0=np.array([0.0, 1.0]),
        singular_set="the vertical axis {x1 = 0}",
        oracle_kind=0,
        h_margin=0.2,
        diam_floor=0.9,
    )


def catalog() -> list[Scenario]:
    """All built-in scenarios, in stable id order."""
    return [_quad2(), _eik2(), _eik3(), _aniso2()]


def get(scenario_id: str) -> Scenario:
    for s in catalog():
        if s.id == scenario_id:
            return s
    raise KeyError(f"unknown scenario {scenario_id!r}")


def oracle_curve(
    s: Scenario, x0, t_max: float, step: float = 1e-6, emit: float = 1e-3
) -> SampledCurve:
    """Reference characteristic, independent of the tracing pipeline.

    Closed form for the exponential-decay scenes; fixed-step RK4 at ``step``
    on the known radial speed otherwise, emitted every ``emit`` of time.
    A start point off the known singular set is rejected.
    """
    x0 = as_vec2(x0)
    if not s.on_singular_set(x0, 1e-9):
        raise ValueError(f"{x0} is not on the singular set of {s.id}")
    if t_max <= 0.0:
        raise ValueError("t_max must be positive")
    n_emit = max(1, int(round(t_max / emit)))
    times = np.linspace(0.0, t_max, n_emit + 1)
    if s.id in ("quad2", "aniso2"):
        ys = x0[1] * np.exp(-times)
        pts = np.stack([np.zeros_like(ys), ys], axis=1)
        return SampledCurve(params=times, points=pts)
    n_steps = max(1, int(round(t_max / step)))
    stride = max(1, n_steps // (len(times) - 1))
    n_steps = stride * (len(times) - 1)
    if s.id == "eik2":
        ys = K.rk4_decay(x0[1], t_max, n_steps, stride, 1)
        pts = np.stack([np.zeros_like(ys), ys], axis=1)
        return SampledCurve(params=times, points=pts)
    # eik3: radial coordinate along the start point's ray, stalling at 0
    ray = None
    for a in _TRIANGLE_SITES:
        sproj = float(x0 @ a)
        if sproj > 0 and float(np.hypot(*(x0 - sproj * a))) <= 1e-9:
            ray = a
            s0 = sproj
            break
    if ray is None:
        if float(np.hypot(*x0)) > 1e-9:
            raise ValueError(f"{x0} is not on a junction ray")
        ray = _TRIANGLE_SITES[0]
        s0 = 0.0
    # the radial ODE reaches 0 in finite time; clamp there (critical point)
    rs = K.rk4_decay(s0, t_max, n_steps, stride, 2)
    rs = np.maximum(rs, 0.0)
    hit = np.nonzero(rs <= 0.0)[0]
    if hit.size:
        rs[hit[0]:] = 0.0
    pts = rs[:, None] * ray[None, :]
    return SampledCurve(params=times, points=pts)
