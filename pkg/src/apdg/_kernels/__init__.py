"""Hot-kernel backend selection.

Two interchangeable implementations of the per-step kernels exist: the pure
numpy reference in :mod:`.pyref` and the compiled Cython extension
:mod:`._fast` (built by setup.py when a compiler is available).  The compiled
one is picked automatically; set ``APDG_BACKEND=python`` or
``APDG_BACKEND=compiled`` to force a choice.  ``benchmarks/backend_bench.py``
compares the two.
"""
import os

from . import pyref

_requested = os.environ.get("APDG_BACKEND", "auto").lower()

impl = pyref
backend_name = "python"

if _requested in ("auto", "compiled"):
    try:
        from . import fastwrap

        impl = fastwrap
        backend_name = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "APDG_BACKEND=compiled but the apdg._kernels._fast extension "
                "is not built; reinstall with a C compiler available"
            )
elif _requested != "python":
    raise ValueError(f"unknown APDG_BACKEND={_requested!r} (use auto|python|compiled)")
