"""End-to-end construction of strict singular characteristics.

Pipeline per anchor point on the singular set:

1. Compute the minimizing selection (p, v) over the superdifferential and
   the exposed-face endpoints in the velocity direction.
2. March a probe line in slope space from the shifted selection against the
   unit velocity, pulling each probe slope back through the inverse gradient
   map; the pulled-back points stay on the singular set by construction.
3. Reparameterize the pulled-back leg by arc length.
4. Integrate the time rescaling tau' = |v| along the leg with the forward
   Euler scheme for right-continuous slope fields, refined until Cauchy.
5. Emit characteristic samples by mapping the rescaled arc positions back
   through the probe line, and re-anchor at the leg end.

Legs truncate on membership drift, domain exit, loss of singularity,
velocity reversal, or a critical sample; re-anchoring restarts the local
construction until the time horizon, a critical point, or the domain
boundary ends the trace.

A single trace is sequential; distinct traces share only immutable inputs
and may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry2d import as_vec2, diameter, hull, project
from .gradmap import NonconvergenceError, NotInImageError, point_for_gradient
from .hamiltonian import (
    DegenerateFaceError,
    Hamiltonian,
    Selection,
    face_endpoints,
    minimal_selection,
)
from .lipcurve import SampledCurve, reparam_by_length, solve_right_ode_interp
from .semiconcave import NormalizedProblem, active_set, evaluate, superdifferential

__all__ = [
    "TraceConfig",
    "CharacteristicSample",
    "AnchorRecord",
    "Trace",
    "VerifyReport",
    "NotSingularError",
    "probe_line",
    "trace_probe_line",
    "build_characteristic",
    "verify",
]


class NotSingularError(ValueError):
    """The start point does not carry a nontrivial superdifferential."""


@dataclass(frozen=True)
class TraceConfig:
    """Discretization knobs for the characteristic construction."""

    p_step: float = 1e-3
    t_max: float = 1.0
    v_min: float = 1e-8
    reanchor_every: int = 50
    ode_tol: float = 1e-8
    membership_tol: float = 1e-7
    diam_tol: float = 1e-6
    max_restarts: int = 400

    def __post_init__(self):
        for name in ("p_step", "t_max", "v_min", "ode_tol", "membership_tol", "diam_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.reanchor_every < 1 or self.max_restarts < 1:
            raise ValueError("reanchor_every and max_restarts must be >= 1")


@dataclass
class CharacteristicSample:
    """One emitted point of the characteristic with its verification data.

    ``fd_residual`` and ``gc_residual`` are filled once the forward neighbor
    is known; they stay 0 on the final sample.
    """

    t: float
    x: np.ndarray
    p: np.ndarray
    v: np.ndarray
    h_value: float
    diam: float
    active: tuple
    superdiff: np.ndarray = field(repr=False, default=None)
    fd_residual: float = 0.0
    gc_residual: float = 0.0


@dataclass(frozen=True)
class AnchorRecord:
    t: float
    x: np.ndarray
    p1: np.ndarray
    p2: np.ndarray


@dataclass(frozen=True)
class Trace:
    samples: list
    anchors: list
    termination: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def points(self) -> np.ndarray:
        return np.array([s.x for s in self.samples])


@dataclass(frozen=True)
class LegSample:
    eta_t: float
    x: np.ndarray
    sel: Selection
    diam: float
    active: tuple
    eta_in_face: bool


@dataclass(frozen=True)
class LegTrace:
    curve: SampledCurve
    samples: list
    stop_reason: str  # "budget" | "critical" | "reversal" | "membership" |
    #                   "nonconvergence" | "domain" | "lost_singularity"
    hit_critical: bool


def probe_line(anchor_p, anchor_v, t: float) -> np.ndarray:
    """Slope-space probe: anchor_p - t * anchor_v / |anchor_v|."""
    anchor_p = as_vec2(anchor_p)
    anchor_v = as_vec2(anchor_v)
    speed = float(np.hypot(*anchor_v))
    if speed <= 0.0:
        raise ValueError("probe line needs a nonzero anchor velocity")
    return anchor_p - (anchor_v / speed) * t


def _measure(prob: NormalizedProblem, H: Hamiltonian, x):
    """Selection, superdifferential diameter, and active set at a point."""
    u = prob.base
    x = as_vec2(x)
    Ku = superdifferential(u, x)
    sel = minimal_selection(H, x, evaluate(u, x), Ku)
    return sel, diameter(Ku), tuple(active_set(u, x)), Ku


def _sample(prob, H, t, x) -> CharacteristicSample:
    sel, diam, active, Ku = _measure(prob, H, x)
    return CharacteristicSample(
        t=float(t), x=as_vec2(x), p=sel.p, v=sel.v,
        h_value=sel.h_value, diam=diam, active=active,
        superdiff=Ku.vertices,
    )


def trace_probe_line(
    prob: NormalizedProblem, H: Hamiltonian, x0, cfg: TraceConfig
) -> LegTrace:
    """Pull one probe-line leg back through the inverse gradient map.

    Marches slope steps of size min(p_step, |v0|/4) from the anchor's
    shifted selection against the unit velocity, for at most reanchor_every
    steps. Stops early on membership drift, domain exit, loss of
    singularity, velocity reversal (forward velocity below half the anchor
    speed), or a critical sample (included, flagged).
    """
    u = prob.base
    x0 = as_vec2(x0)
    sel0, diam0, active0, _ = _measure(prob, H, x0)
    if diam0 <= cfg.diam_tol:
        raise NotSingularError(f"anchor {x0} has superdifferential diameter {diam0}")
    speed0 = float(np.hypot(*sel0.v))
    if speed0 <= cfg.v_min:
        raise ValueError(f"anchor {x0} is critical (|v| = {speed0})")
    vhat = sel0.v / speed0
    p_shift = sel0.p - prob.shift_grad(x0)
    delta = min(cfg.p_step, 0.25 * speed0)

    dom = u.domain
    boundary = 0.98 * dom.radius
    samples = [LegSample(0.0, x0, sel0, diam0, active0, True)]
    reason = "budget"
    hit_critical = False
    prev_x = x0
    for k in range(1, cfg.reanchor_every + 1):
        eta_t = k * delta
        p_k = p_shift - vhat * eta_t
        try:
            gp = point_for_gradient(
                prob, p_k, x_hint=prev_x,
                membership_tol=cfg.membership_tol * (1.0 + float(np.hypot(*p_k))),
            )
        except NotInImageError:
            reason = "membership"
            break
        except NonconvergenceError:
            reason = "nonconvergence"
            break
        x_k = gp.x
        if float(np.hypot(*(x_k - dom.center))) >= boundary:
            reason = "domain"
            break
        sel_k, diam_k, active_k, Ku_k = _measure(prob, H, x_k)
        if diam_k <= cfg.diam_tol:
            reason = "lost_singularity"
            break
        in_face = False
        try:
            q1, q2 = face_endpoints(Ku_k, sel_k.v, cfg.v_min)
            seg = hull(
                np.stack([q1 - prob.shift_grad(x_k), q2 - prob.shift_grad(x_k)])
            )
            in_face = bool(
                float(np.hypot(*(project(seg, p_k) - p_k)))
                <= 10.0 * cfg.membership_tol * (1.0 + float(np.hypot(*p_k)))
            )
        except (DegenerateFaceError, ValueError):
            in_face = False
        speed_k = float(np.hypot(*sel_k.v))
        if speed_k <= cfg.v_min:
            samples.append(LegSample(eta_t, x_k, sel_k, diam_k, active_k, in_face))
            reason = "critical"
            hit_critical = True
            break
        if float(sel_k.v @ vhat) < 0.5 * speed0:
            reason = "reversal"
            break
        samples.append(LegSample(eta_t, x_k, sel_k, diam_k, active_k, in_face))
        prev_x = x_k

    curve = SampledCurve(
        params=np.array([s.eta_t for s in samples]),
        points=np.array([s.x for s in samples]),
    )
    return LegTrace(curve=curve, samples=samples, stop_reason=reason,
                    hit_critical=hit_critical)


def _constant_tail(samples, prob, H, x, t_from, t_max, n=8):
    for t in np.linspace(t_from, t_max, n + 1)[1:]:
        samples.append(_sample(prob, H, t, x))


def _collapse_indices(points, eps):
    kept = [0]
    for i in range(1, len(points)):
        if float(np.hypot(*(points[i] - points[kept[-1]]))) > eps:
            kept.append(i)
    return kept


def build_characteristic(
    prob: NormalizedProblem, H: Hamiltonian, x0, cfg: TraceConfig | None = None
) -> Trace:
    """Trace the strict singular characteristic from a singular start point.

    Returns the emitted samples with residuals filled, the re-anchor
    records, and the termination reason: reached_t_max, critical_point
    (constant continuation after the velocity vanishes), left_domain,
    degenerate_face, or numerical_failure.
    """
    if cfg is None:
        cfg = TraceConfig()
    x0 = as_vec2(x0)
    _, diam0, _, _ = _measure(prob, H, x0)
    if diam0 <= cfg.diam_tol:
        raise NotSingularError(
            f"start point {x0} not singular (diameter {diam0:.3e})"
        )

    samples = [_sample(prob, H, 0.0, x0)]
    anchors: list[AnchorRecord] = []
    diagnostics = {"legs": 0, "eta_in_face_checks": 0, "eta_in_face_hits": 0}
    termination = None
    t_cum = 0.0
    x_a = x0
    eps_time = 1e-12 * (1.0 + cfg.t_max)

    for _ in range(cfg.max_restarts):
        sel_a, diam_a, _, Ku_a = _measure(prob, H, x_a)
        speed_a = float(np.hypot(*sel_a.v))
        if speed_a <= cfg.v_min:
            termination = "critical_point"
            diagnostics["critical_time"] = t_cum
            _constant_tail(samples, prob, H, x_a, t_cum, cfg.t_max)
            break
        try:
            p1, p2 = face_endpoints(Ku_a, sel_a.v, cfg.v_min)
        except DegenerateFaceError:
            termination = "degenerate_face"
            break
        anchors.append(AnchorRecord(t=t_cum, x=x_a, p1=p1, p2=p2))
        diagnostics["legs"] += 1
        face_len = float(np.hypot(*(p2 - p1)))
        diagnostics["max_step_to_face_ratio"] = max(
            diagnostics.get("max_step_to_face_ratio", 0.0),
            cfg.p_step / face_len if face_len > 0 else np.inf,
        )

        leg = trace_probe_line(prob, H, x_a, cfg)
        for s in leg.samples[1:]:
            diagnostics["eta_in_face_checks"] += 1
            diagnostics["eta_in_face_hits"] += int(s.eta_in_face)

        n_use = len(leg.samples) - (1 if leg.hit_critical else 0)
        if n_use < 2:
            if leg.hit_critical:
                # critical point one probe step away: land there at the
                # anchor speed, then hold (the velocity's left limit may
                # jump at arrival; its right limit is 0 on the constant part)
                crit = leg.samples[-1]
                gap = float(np.hypot(*(crit.x - x_a)))
                dt = gap / max(speed_a, cfg.v_min)
                t_cum += dt
                samples.append(_sample(prob, H, min(t_cum, cfg.t_max), crit.x))
                termination = "critical_point"
                diagnostics["critical_time"] = min(t_cum, cfg.t_max)
                if t_cum < cfg.t_max:
                    _constant_tail(samples, prob, H, crit.x, t_cum, cfg.t_max)
                break
            if leg.stop_reason == "reversal":
                termination = "critical_point"
                diagnostics["critical_time"] = t_cum
                _constant_tail(samples, prob, H, x_a, t_cum, cfg.t_max)
                break
            if leg.stop_reason == "domain":
                termination = "left_domain"
                break
            termination = "numerical_failure"
            diagnostics["failure"] = leg.stop_reason
            break

        # arc-length reparameterization of the usable part of the leg
        use = leg.samples[:n_use]
        kept = _collapse_indices([s.x for s in use], 0.0)
        gamma2 = reparam_by_length(
            SampledCurve(
                params=np.array([use[i].eta_t for i in kept]),
                points=np.array([use[i].x for i in kept]),
            ),
            eps_stall=0.0,
        )
        arcs = gamma2.params
        etas = np.array([use[i].eta_t for i in kept])
        speeds = np.array([float(np.hypot(*use[i].sel.v)) for i in kept])
        b1 = 0.9 * float(speeds.min())
        b2 = 1.1 * float(speeds.max())
        t_grid, tau, m_final, _ = solve_right_ode_interp(
            arcs, speeds, b1, b2, tol=cfg.ode_tol, m0=max(16, len(kept)),
        )
        diagnostics["euler_m"] = max(diagnostics.get("euler_m", 0), m_final)
        T_leg = float(t_grid[-1])
        remaining = cfg.t_max - t_cum

        h_grid = T_leg / m_final
        stride = max(1, int(round(0.75 * cfg.p_step / h_grid)))
        emit_idx = sorted(set(range(stride, m_final + 1, stride)) | {m_final})
        prev_hint = x_a
        reached_end = False
        for j in emit_idx:
            tj = float(t_grid[j])
            if tj > remaining + eps_time:
                arc_cut = float(np.interp(remaining, t_grid, tau))
                eta_cut = float(np.interp(arc_cut, arcs, etas))
                gp = point_for_gradient(
                    prob, probe_line(sel_a.p - prob.shift_grad(x_a), sel_a.v, eta_cut),
                    x_hint=prev_hint,
                )
                samples.append(_sample(prob, H, cfg.t_max, gp.x))
                reached_end = True
                break
            eta_j = float(np.interp(float(tau[j]), arcs, etas))
            gp = point_for_gradient(
                prob, probe_line(sel_a.p - prob.shift_grad(x_a), sel_a.v, eta_j),
                x_hint=prev_hint,
            )
            samples.append(_sample(prob, H, t_cum + tj, gp.x))
            prev_hint = gp.x
        if reached_end:
            termination = "reached_t_max"
            break
        t_cum += T_leg
        x_a = samples[-1].x
        if t_cum >= cfg.t_max - eps_time:
            termination = "reached_t_max"
            break
    else:
        termination = "numerical_failure"
        diagnostics["failure"] = "restart budget exhausted"

    _fill_residuals(samples, H)
    return Trace(samples=samples, anchors=anchors, termination=termination,
                 diagnostics=diagnostics)


def velocity_hull_distance(H: Hamiltonian, superdiff_vertices, w) -> float:
    """Distance from w to the p-gradient image of the superdifferential.

    For quadratic-form Hamiltonians the p-gradient is linear, so the image
    of the polytope is the polytope of transformed vertices (exact path).
    """
    VK = hull(np.asarray(superdiff_vertices) @ H.A.T)
    return float(np.hypot(*(project(VK, w) - w)))


def velocity_hull_distance_sampled(
    H: Hamiltonian, superdiff_vertices, w, n: int = 200, seed: int = 0
) -> float:
    """Sampled fallback: distance to the hull of p-gradients at polytope samples.

    Used when the p-gradient is not linear in p; for the quadratic-form kind
    it agrees with the exact path up to sampling density.
    """
    verts = np.asarray(superdiff_vertices)
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(len(verts)), size=n)
    pts = weights @ verts
    images = pts @ H.A.T
    return float(np.hypot(*(project(hull(images), w) - w)))


def _fill_residuals(samples, H: Hamiltonian):
    for k in range(len(samples) - 1):
        s, s_next = samples[k], samples[k + 1]
        dt = s_next.t - s.t
        if dt <= 0.0:
            continue
        fd = (s_next.x - s.x) / dt
        s.fd_residual = float(np.hypot(*(fd - s.v)))
        s.gc_residual = velocity_hull_distance(H, s.superdiff, fd)


@dataclass(frozen=True)
class VerifyReport:
    """Aggregated residuals and pass flags for a completed trace."""

    max_fd: float
    max_gc: float
    min_diam: float
    max_right_oscillation: float
    max_argmin_violation: float
    gc_within_twice_fd: bool
    anchor_consistency: float
    cluster_radius: float
    passes: dict

    def all_pass(self) -> bool:
        return all(self.passes.values())


def verify(
    trace: Trace, prob: NormalizedProblem, H: Hamiltonian, cfg: TraceConfig
) -> VerifyReport:
    """Check the traced curve against every claimed property.

    Right-derivative and inclusion residuals come from the samples; the
    forward oscillation of v is measured over 10-sample windows that do not
    cross a re-anchor record or the critical arrival time (the velocity's
    left limit is allowed to jump at those events). The pass thresholds
    scale with the probe step: 5 * p_step for the right derivative,
    10 * p_step for the oscillation.
    """
    samples = trace.samples
    n = len(samples)
    fds = np.array([s.fd_residual for s in samples[: max(1, n - 1)]])
    gcs = np.array([s.gc_residual for s in samples[: max(1, n - 1)]])
    diams = np.array([s.diam for s in samples])
    times = trace.times
    events = [a.t for a in trace.anchors]
    if "critical_time" in trace.diagnostics:
        events.append(trace.diagnostics["critical_time"])
    anchor_times = np.array(sorted(events)) if events else np.empty(0)

    window = 10
    max_osc = 0.0
    for k in range(n - 1):
        hi = min(n - 1, k + window)
        t_lo, t_hi = times[k], times[hi]
        if anchor_times.size and np.any(
            (anchor_times > t_lo + 1e-15) & (anchor_times <= t_hi + 1e-15)
        ):
            continue
        vk = samples[k].v
        for j in range(k + 1, hi + 1):
            osc = float(np.hypot(*(samples[j].v - vk)))
            if osc > max_osc:
                max_osc = osc

    # h(p) <= h(q) for every vertex q; the u- and x-terms cancel in the
    # difference, so only the quadratic forms are compared
    max_argmin = -np.inf
    for s in samples:
        hp = 0.5 * float(s.p @ H.A @ s.p)
        for q in s.superdiff:
            max_argmin = max(max_argmin, hp - 0.5 * float(q @ H.A @ q))
    gc_ok = bool(np.all(gcs <= 2.0 * fds + 1e-12))

    anchor_res = 0.0
    for k in range(1, len(trace.anchors)):
        prev, cur = trace.anchors[k - 1], trace.anchors[k]
        sel, _, _, _ = _measure(prob, H, cur.x)
        seg = hull(np.stack([prev.p1, prev.p2]))
        anchor_res = max(
            anchor_res, float(np.hypot(*(project(seg, sel.p) - sel.p)))
        )

    cluster = 0.0
    for a in trace.anchors:
        after = [s for s in samples if a.t < s.t <= a.t + 5 * cfg.p_step][:5]
        for s in after:
            for g in s.superdiff:
                d = min(
                    float(np.hypot(*(g - a.p1))), float(np.hypot(*(g - a.p2)))
                )
                cluster = max(cluster, d)

    passes = {
        "right_derivative": bool(np.all(fds <= 5.0 * cfg.p_step)),
        "right_continuity": bool(max_osc <= 10.0 * cfg.p_step),
        "singularity_persistence": bool(np.all(diams > cfg.diam_tol)),
        "argmin_selection": bool(max_argmin <= 1e-8),
        "generalized_inclusion": gc_ok,
    }
    return VerifyReport(
        max_fd=float(fds.max()) if fds.size else 0.0,
        max_gc=float(gcs.max()) if gcs.size else 0.0,
        min_diam=float(diams.min()),
        max_right_oscillation=max_osc,
        max_argmin_violation=float(max_argmin),
        gc_within_twice_fd=gc_ok,
        anchor_consistency=anchor_res,
        cluster_radius=cluster,
        passes=passes,
    )
