"""Kernel backend selection.

The compiled Cython module is preferred; the pure-numpy fallback is used when
it is missing. ``PRNUSCOPE_KERNELS=py`` forces the fallback and
``PRNUSCOPE_KERNELS=cy`` makes a missing extension a hard error (useful in CI
and for the backend benchmark).
"""

import os

_requested = os.environ.get("PRNUSCOPE_KERNELS", "").strip().lower()
if _requested not in ("", "py", "cy"):
    raise ImportError(
        f"PRNUSCOPE_KERNELS must be 'py' or 'cy', not {_requested!r}"
    )

if _requested == "py":
    from . import _kernels_py as _impl

    BACKEND = "py"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cy"
    except ImportError:
        if _requested == "cy":
            raise
        from . import _kernels_py as _impl

        BACKEND = "py"

dwt_level2d = _impl.dwt_level2d
idwt_level2d = _impl.idwt_level2d
min_box_mean = _impl.min_box_mean
DB8_LO = _impl.DB8_LO
DB8_HI = _impl.DB8_HI
