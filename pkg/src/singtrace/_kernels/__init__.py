"""Numeric kernel backend selection.

The compiled Cython backend is used when available; the pure-Python module
is the fallback and the reference. Set SINGTRACE_PURE=1 to force the pure
backend (the benchmark and the equivalence tests import both directly).
"""

import os

from . import pure

if os.environ.get("SINGTRACE_PURE") == "1":
    impl = pure
else:
    try:
        from . import _ext as impl  # type: ignore[attr-defined]
    except ImportError:
        impl = pure

BACKEND = impl.BACKEND

branch_value = impl.branch_value
branch_grad = impl.branch_grad
branch_hess = impl.branch_hess
min_value = impl.min_value
active_indices = impl.active_indices
sheet_obj = impl.sheet_obj
sheet_argmax = impl.sheet_argmax
ridge_argmax = impl.ridge_argmax
triple_point = impl.triple_point
euler_interp = impl.euler_interp
rk4_decay = impl.rk4_decay
