"""Command-line interface: scene ingestion, tracing, verification, outputs.

Subcommands:

    trace --scene <file|builtin:id> [--out DIR] [--plot]
        Trace the characteristic and emit trace.csv, report.json, and
        optionally plot.svg into DIR; a summary report always goes to
        stdout.
    verify --scene <file|builtin:id>
        Run the scene-level property suites (inverse-map contraction and
        monotonicity, exposed-face oracle, selection brute force, viscosity
        residual grid).
    list-scenarios
        Print the built-in scenario ids.

Exit codes: 0 success, 2 configuration or schema error, 3 numerical
failure, 4 verification failure.

Scene files are JSON with a top-level ``"version": 1``:

    {
      "version": 1,
      "hamiltonian": {"kind": "quadratic_form", "A": [1,0,0,1],
                      "beta": 1.0, "g_poly": [0,0,0,0,0,0]},
      "branches": [{"kind": "quadratic", "Q": [1,0,0,1], "b": [1,0], "d": 0},
                   {"kind": "cone", "apex": [1,0], "c": 1, "d": 0, "r": 0.1},
                   {"kind": "affine", "g": [1,0], "d": 0}],
      "domain": {"center": [0, 0.4], "radius": 1.3},
      "x0": [0, 1],
      "trace": {"p_step": 1e-3, "t_max": 1.0},
      "declared_C0": 0.0,
      "viscosity_residual_tol": 1e-9
    }
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry2d import exposed_face, hull
from .gradmap import NonconvergenceError, NotInImageError, check_bilipschitz
from .hamiltonian import Hamiltonian, minimal_selection
from .lipcurve import RefinementError
from .scenarios import catalog, get as get_scenario
from .semiconcave import (
    AffineBranch,
    ConeBranch,
    Domain,
    MinFunction,
    QuadraticBranch,
    active_set,
    estimate_semiconcavity,
    evaluate,
    normalize,
)
from .tracer import NotSingularError, TraceConfig, build_characteristic, verify

__all__ = ["SceneSpec", "SceneError", "load_scene", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4

CSV_COLUMNS = (
    "t", "x1", "x2", "p1", "p2", "v1", "v2",
    "h_value", "diam", "fd_residual", "gc_residual",
)


class SceneError(ValueError):
    """Scene file failed schema validation."""


@dataclass(frozen=True)
class SceneSpec:
    """Validated problem description ready for tracing."""

    name: str
    u: MinFunction
    H: Hamiltonian
    x0: np.ndarray
    trace: TraceConfig
    viscosity_residual_tol: float = 1e-9


def _need(obj: dict, key: str, kind=None):
    if key not in obj:
        raise SceneError(f"missing required key {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise SceneError(f"key {key!r} has wrong type {type(val).__name__}")
    return val


def _mat2(flat) -> np.ndarray:
    arr = np.asarray(flat, dtype=float)
    if arr.shape == (2, 2):
        return arr
    if arr.shape == (4,):
        return arr.reshape(2, 2)
    raise SceneError("2x2 matrix must be given row-major with 4 entries")


def _parse_branch(spec: dict):
    kind = _need(spec, "kind", str)
    try:
        if kind == "quadratic":
            return QuadraticBranch(
                _mat2(_need(spec, "Q")), _need(spec, "b"), float(_need(spec, "d"))
            )
        if kind == "cone":
            return ConeBranch(
                _need(spec, "apex"), float(_need(spec, "c")),
                float(_need(spec, "d")), float(_need(spec, "r")),
            )
        if kind == "affine":
            return AffineBranch(_need(spec, "g"), float(_need(spec, "d")))
    except (ValueError, TypeError) as exc:
        raise SceneError(f"bad {kind} branch: {exc}") from exc
    raise SceneError(f"unknown branch kind {kind!r}")


def parse_scene(doc: dict, name: str = "scene") -> SceneSpec:
    if not isinstance(doc, dict):
        raise SceneError("scene document must be a JSON object")
    if doc.get("version") != 1:
        raise SceneError("scene file must declare \"version\": 1")
    hspec = _need(doc, "hamiltonian", dict)
    if hspec.get("kind", "quadratic_form") != "quadratic_form":
        raise SceneError("only quadratic_form Hamiltonians are supported")
    try:
        H = Hamiltonian(
            A=_mat2(_need(hspec, "A")),
            beta=float(hspec.get("beta", 0.0)),
            g_poly=tuple(hspec.get("g_poly", ())),
        )
    except (ValueError, TypeError) as exc:
        raise SceneError(f"bad hamiltonian: {exc}") from exc
    dspec = _need(doc, "domain", dict)
    try:
        domain = Domain(_need(dspec, "center"), float(_need(dspec, "radius")))
        branches = tuple(_parse_branch(b) for b in _need(doc, "branches", list))
        u = MinFunction(branches=branches, domain=domain)
    except SceneError:
        raise
    except (ValueError, TypeError) as exc:
        raise SceneError(str(exc)) from exc
    c0 = doc.get("declared_C0")
    if c0 is None:
        c0 = estimate_semiconcavity(u, 32)
    u = u.with_semiconcavity(float(c0))
    tspec = doc.get("trace", {})
    if not isinstance(tspec, dict):
        raise SceneError("trace section must be an object")
    allowed = {f.name for f in dataclasses.fields(TraceConfig)}
    unknown = set(tspec) - allowed
    if unknown:
        raise SceneError(f"unknown trace options: {sorted(unknown)}")
    try:
        cfg = TraceConfig(**{k: type(getattr(TraceConfig(), k))(v) for k, v in tspec.items()})
        x0 = np.asarray(_need(doc, "x0"), dtype=float).reshape(2)
    except (ValueError, TypeError) as exc:
        raise SceneError(str(exc)) from exc
    if not domain.contains(x0):
        raise SceneError(f"x0 {x0.tolist()} outside the domain")
    return SceneSpec(
        name=name, u=u, H=H, x0=x0, trace=cfg,
        viscosity_residual_tol=float(doc.get("viscosity_residual_tol", 1e-9)),
    )


def load_scene(ref: str, overrides: dict | None = None) -> SceneSpec:
    """Resolve ``builtin:<id>`` or a JSON file path to a SceneSpec."""
    if ref.startswith("builtin:"):
        sid = ref.split(":", 1)[1]
        try:
            s = get_scenario(sid)
        except KeyError as exc:
            raise SceneError(str(exc)) from exc
        cfg = TraceConfig(**(overrides or {}))
        return SceneSpec(name=sid, u=s.u, H=s.H, x0=s.x0, trace=cfg)
    path = Path(ref)
    if not path.is_file():
        raise SceneError(f"scene file not found: {ref}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SceneError(f"invalid JSON in {ref}: {exc}") from exc
    return parse_scene(doc, name=path.stem)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trace_csv(trace, path: Path):
    lines = [",".join(CSV_COLUMNS)]
    for s in trace.samples:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    s.t, s.x[0], s.x[1], s.p[0], s.p[1], s.v[0], s.v[1],
                    s.h_value, s.diam, s.fd_residual, s.gc_residual,
                )
            )
        )
    path.write_text("\n".join(lines) + "\n", newline="\n")


def build_report(scene: SceneSpec, trace, rep) -> dict:
    return {
        "scenario": scene.name,
        "config": dataclasses.asdict(scene.trace),
        "termination": trace.termination,
        "residuals": {
            "max_fd": rep.max_fd,
            "max_gc": rep.max_gc,
            "min_diam": rep.min_diam,
            "max_right_oscillation": rep.max_right_oscillation,
            "max_argmin_violation": rep.max_argmin_violation,
            "anchor_consistency": rep.anchor_consistency,
            "cluster_radius": rep.cluster_radius,
        },
        "passes": dict(rep.passes),
        "n_samples": len(trace.samples),
        "n_anchors": len(trace.anchors),
    }


def write_plot_svg(scene: SceneSpec, trace, path: Path, grid_n: int = 160):
    """Singular-set scan in light gray, trace in black, anchors as circles."""
    c = scene.u.domain.center
    r = scene.u.domain.radius
    size = 800.0
    scale = size / (2.0 * r)

    def px(pt):
        return (
            size / 2 + (pt[0] - c[0]) * scale,
            size / 2 - (pt[1] - c[1]) * scale,
        )

    cell = 2.0 * r / grid_n
    gray = []
    for i in range(grid_n + 1):
        for j in range(grid_n + 1):
            x = np.array([c[0] - r + i * cell, c[1] - r + j * cell])
            if not scene.u.domain.contains(x):
                continue
            if len(active_set(scene.u, x, 0.9 * cell)) >= 2:
                gray.append(px(x))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="800" height="800" '
        f'viewBox="0 0 800 800">',
        '<rect width="800" height="800" fill="white"/>',
    ]
    for gx, gy in gray:
        parts.append(
            f'<circle cx="{gx:.2f}" cy="{gy:.2f}" r="1.5" fill="#cccccc"/>'
        )
    pts = " ".join(f"{u:.3f},{v:.3f}" for u, v in (px(p) for p in trace.points))
    parts.append(
        f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>'
    )
    for a in trace.anchors:
        ax, ay = px(a.x)
        parts.append(
            f'<circle cx="{ax:.2f}" cy="{ay:.2f}" r="4" fill="none" '
            f'stroke="black" stroke-width="1"/>'
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", newline="\n")


def cmd_trace(args) -> int:
    try:
        scene = load_scene(args.scene)
    except SceneError as exc:
        print(f"scene error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    prob = normalize(scene.u, scene.H)
    try:
        trace = build_characteristic(prob, scene.H, scene.x0, scene.trace)
    except (NotSingularError, NotInImageError, NonconvergenceError,
            RefinementError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    rep = verify(trace, prob, scene.H, scene.trace)
    report = build_report(scene, trace, rep)
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_trace_csv(trace, out / "trace.csv")
        (out / "report.json").write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", newline="\n"
        )
        if args.plot:
            write_plot_svg(scene, trace, out / "plot.svg")
    if trace.termination == "numerical_failure":
        print(
            f"trace ended in numerical failure: {trace.diagnostics}",
            file=sys.stderr,
        )
        return EXIT_NUMERIC
    if not rep.all_pass():
        failing = sorted(k for k, v in rep.passes.items() if not v)
        print(f"verification failed: {failing}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _suite_bilipschitz(scene: SceneSpec, rng, n_pairs=1000):
    prob = normalize(scene.u, scene.H)
    slopes = []
    tries = 0
    while len(slopes) < 2 * n_pairs and tries < 40 * n_pairs:
        tries += 1
        x = scene.u.domain.center + rng.uniform(-1, 1, 2) * scene.u.domain.radius * 0.9
        if not scene.u.domain.contains(x):
            continue
        Kw = prob.w_superdifferential(x)
        lam = rng.uniform(0.0, 1.0)
        if Kw.n == 1:
            slopes.append(Kw.vertices[0])
        else:
            slopes.append(
                lam * Kw.vertices[0] + (1 - lam) * Kw.vertices[rng.integers(1, Kw.n)]
            )
    pairs = list(zip(slopes[:n_pairs], slopes[n_pairs: 2 * n_pairs]))
    rep = check_bilipschitz(prob, pairs)
    return {
        "n_pairs": rep.n_pairs,
        "max_contraction_violation": float(rep.max_contraction_violation),
        "max_monotonicity_violation": float(rep.max_monotonicity_violation),
        "pass": bool(rep.ok),
    }


def _suite_exposed_face(rng, n=200):
    bad = 0
    for _ in range(n):
        K = hull(rng.uniform(-2, 2, size=(rng.integers(1, 7), 2)))
        th = rng.normal(size=2)
        nrm = np.hypot(*th)
        if nrm < 1e-9:
            continue
        scores = K.vertices @ (th / nrm)
        best = set(np.nonzero(scores <= scores.min() + 1e-12)[0])
        if set(exposed_face(K, th).vertex_indices) != best:
            bad += 1
    return {"n": n, "mismatches": bad, "pass": bad == 0}


def _suite_selection_oracle(scene: SceneSpec, rng, n=200, n_samples=10_000):
    worst = -np.inf
    for _ in range(n):
        K = hull(rng.uniform(-2, 2, size=(rng.integers(1, 7), 2)))
        B = rng.normal(size=(2, 2))
        H = Hamiltonian(A=B @ B.T + 0.2 * np.eye(2))
        sel = minimal_selection(H, (0, 0), 0.0, K)
        W = rng.dirichlet(np.ones(K.n), size=n_samples)
        pts = W @ K.vertices
        hs = 0.5 * np.einsum("ij,jk,ik->i", pts, H.A, pts)
        worst = max(worst, float(sel.h_value) - float(hs.min()))
    return {"n": n, "max_excess": worst, "pass": bool(worst <= 1e-6)}


def _suite_viscosity(scene: SceneSpec, grid_n=40):
    c = scene.u.domain.center
    r = scene.u.domain.radius
    worst = 0.0
    checked = 0
    for gx in np.linspace(-r, r, grid_n):
        for gy in np.linspace(-r, r, grid_n):
            x = c + (gx, gy)
            if not scene.u.domain.contains(x):
                continue
            idx = active_set(scene.u, x)
            if len(idx) != 1:
                continue
            g = scene.u.branches[idx[0]].grad(x)
            worst = max(worst, abs(scene.H.value(x, g, evaluate(scene.u, x))))
            checked += 1
    return {
        "points": checked,
        "max_residual": float(worst),
        "pass": bool(worst <= scene.viscosity_residual_tol),
    }


def cmd_verify(args) -> int:
    try:
        scene = load_scene(args.scene)
    except SceneError as exc:
        print(f"scene error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rng = np.random.default_rng(20240 + len(scene.name))
    try:
        suites = {
            "bilipschitz_monotonicity": _suite_bilipschitz(scene, rng),
            "exposed_face_oracle": _suite_exposed_face(rng),
            "selection_oracle": _suite_selection_oracle(scene, rng),
            "viscosity_residual_grid": _suite_viscosity(scene),
        }
    except (NotInImageError, NonconvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    ok = all(s["pass"] for s in suites.values())
    print(json.dumps({"scenario": scene.name, "suites": suites, "pass": ok},
                     indent=2, sort_keys=True))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_list(_args) -> int:
    for s in catalog():
        print(f"{s.id}\t{s.description}")
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="singtrace",
        description="Trace and verify strict singular characteristics of "
        "2D Hamilton-Jacobi equations",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    ap_trace = sub.add_parser("trace", help="trace a characteristic")
    ap_trace.add_argument("--scene", required=True,
                          help="scene JSON path or builtin:<id>")
    ap_trace.add_argument("--out", help="output directory for trace.csv/report.json")
    ap_trace.add_argument("--plot", action="store_true", help="also write plot.svg")
    ap_trace.set_defaults(func=cmd_trace)
    ap_verify = sub.add_parser("verify", help="run scene property suites")
    ap_verify.add_argument("--scene", required=True)
    ap_verify.set_defaults(func=cmd_verify)
    ap_list = sub.add_parser("list-scenarios", help="print builtin scenario ids")
    ap_list.set_defaults(func=cmd_list)
    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
