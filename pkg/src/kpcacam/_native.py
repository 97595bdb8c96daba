"""Select the compiled extension core or the pure-Python fallback.

Set KPCACAM_PURE_PYTHON=1 to force the fallback (used by the benchmark
and by CI matrices without a compiler).
"""

import os

if os.environ.get("KPCACAM_PURE_PYTHON"):
    from . import _core_py as core
    HAVE_NATIVE = False
else:
    try:
        from . import _core as core  # type: ignore[attr-defined]
        HAVE_NATIVE = True
    except ImportError:
        from . import _core_py as core
        HAVE_NATIVE = False

jacobi_rotate_inplace = core.jacobi_rotate_inplace
gauss_seidel_solve = core.gauss_seidel_solve
