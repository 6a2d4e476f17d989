"""Hot-kernel dispatch: compiled extension if built, numpy fallback otherwise.

``HAVE_COMPILED`` records which implementation is active.  Set
NSVLAB_KERNELS=python to force the fallback.
"""

import os

if os.environ.get("NSVLAB_KERNELS", "").lower() == "python":
    from . import _kernels_py as _impl

    HAVE_COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        from . import _kernels_py as _impl

        HAVE_COMPILED = False

products6 = _impl.products6
div_project_mask = _impl.div_project_mask
rhs_combine = _impl.rhs_combine
lawson_stage_a = _impl.lawson_stage_a
lawson_stage_b = _impl.lawson_stage_b
lawson_stage_c = _impl.lawson_stage_c
lawson_final = _impl.lawson_final
sabra_advance = _impl.sabra_advance
