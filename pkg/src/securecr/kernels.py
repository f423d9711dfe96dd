"""Backend selection for the scalar rate kernel.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python twin is used. Set ``SECURECR_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

_force_py = os.environ.get("SECURECR_PURE_PYTHON", "").strip() not in ("", "0")

if _force_py:
    RateKernel = _pykernels.RateKernel
    BACKEND = "python"
else:
    try:
        from ._ckernels import RateKernel  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        RateKernel = _pykernels.RateKernel
        BACKEND = "python"

PyRateKernel = _pykernels.RateKernel


def compiled_kernel():
    """Return the compiled kernel class, or None when the extension is missing."""
    try:
        from ._ckernels import RateKernel as CK
    except ImportError:
        return None
    return CK
