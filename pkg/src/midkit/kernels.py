"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when it is
not built. Set MIDKIT_BACKEND=python or MIDKIT_BACKEND=native to force a
choice (forcing native raises if the extension is missing).
"""

import os

_requested = os.environ.get("MIDKIT_BACKEND", "").strip().lower()

if _requested in ("python", "py", "fallback"):
    from . import _kernels_py as _impl

    BACKEND = "python"
elif _requested in ("native", "compiled", "c"):
    from . import _native as _impl  # noqa: F401  (ImportError is the contract)

    BACKEND = "native"
elif _requested == "":
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"
else:
    raise RuntimeError(f"MIDKIT_BACKEND={_requested!r} not recognized (use native or python)")

encode_linear = _impl.encode_linear
encode_step = _impl.encode_step
eval_main = _impl.eval_main
eval_pair = _impl.eval_pair
pair_design = _impl.pair_design
