"""Benchmark the pure-Python kernels against the compiled backend.

Micro-benchmarks run both backends in-process; the end-to-end trace runs in
subprocesses so the import-time backend selection is exercised for real.

    python benchmarks/bench_kernels.py [--skip-e2e]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from singtrace._kernels import pure
from singtrace.scenarios import get
from singtrace.semiconcave import normalize

try:
    from singtrace._kernels import _ext
except ImportError:
    _ext = None


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_euler(mod, knots, vals, t_end, m=200_000):
    return timeit(lambda: mod.euler_interp(knots, vals, t_end, m))


def bench_rk4(mod, n=1_000_000):
    return timeit(lambda: mod.rk4_decay(1.0, 1.0, n, n, 1))


def bench_stepwork(mod, kinds, params, c1, n=2000):
    rng = np.random.default_rng(0)
    ps = rng.uniform(-1.5, 1.5, size=(n, 2))

    def run():
        for p1, p2 in ps:
            for i in range(len(kinds)):
                mod.sheet_argmax(kinds, params, c1, i, p1, p2)
            mod.ridge_argmax(kinds, params, c1, 0, 1, p1, p2, 0.0, 0.4, 0.5,
                             1e-12, 60)

    return timeit(run)


def bench_trace_subprocess(pure_backend: bool):
    env = dict(os.environ)
    if pure_backend:
        env["SINGTRACE_PURE"] = "1"
    else:
        env.pop("SINGTRACE_PURE", None)
    code = (
        "import time\n"
        "from singtrace.scenarios import get\n"
        "from singtrace.semiconcave import normalize\n"
        "from singtrace.tracer import TraceConfig, build_characteristic\n"
        "import singtrace\n"
        "s = get('quad2'); prob = normalize(s.u, s.H)\n"
        "cfg = TraceConfig(p_step=1e-3, t_max=1.0, ode_tol=1e-8)\n"
        "t0 = time.perf_counter()\n"
        "build_characteristic(prob, s.H, s.x0, cfg)\n"
        "print(singtrace.kernel_backend, time.perf_counter() - t0)\n"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True,
        check=True,
    )
    name, secs = out.stdout.split()
    return name, float(secs)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--skip-e2e", action="store_true",
                    help="skip the subprocess end-to-end trace comparison")
    args = ap.parse_args()

    s = get("quad2")
    prob = normalize(s.u, s.H)
    kinds, params = s.u.packed
    knots = np.linspace(0.0, 0.05, 51)
    vals = 1.0 - 0.5 * knots

    backends = [("pure", pure)]
    if _ext is not None:
        backends.append(("cython", _ext))
    else:
        print("compiled backend not built; showing pure only")

    rows = []
    for name, mod in backends:
        rows.append(
            (
                name,
                bench_euler(mod, knots, vals, 0.05),
                bench_rk4(mod),
                bench_stepwork(mod, kinds, params, prob.c1),
            )
        )
    print(f"{'backend':<8} {'euler 2e5 steps':>16} {'rk4 1e6 steps':>14} "
          f"{'step work 2e3':>14}")
    for name, te, tr, ts in rows:
        print(f"{name:<8} {te:>14.4f}s {tr:>12.4f}s {ts:>12.4f}s")
    if len(rows) == 2:
        print(
            f"{'speedup':<8} {rows[0][1] / rows[1][1]:>14.1f}x "
            f"{rows[0][2] / rows[1][2]:>12.1f}x {rows[0][3] / rows[1][3]:>12.1f}x"
        )

    if not args.skip_e2e:
        print("\nend-to-end quad2 trace (p_step=1e-3, t_max=1):")
        for pure_flag in (True, False) if _ext is not None else (True,):
            name, secs = bench_trace_subprocess(pure_flag)
            print(f"  {name:<8} {secs:.2f}s")


if __name__ == "__main__":
    main()
