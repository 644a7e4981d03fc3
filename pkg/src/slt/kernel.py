"""Selects the integration kernel at import time.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``SLT_PURE_PYTHON`` is set to a non-empty value, the
pure-Python mirror is used. Both expose the same ``integrate`` function.
"""

import os

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = {"python": _kernel_py.integrate}
if _compiled is not None:
    BACKENDS["cython"] = _compiled.integrate

if os.environ.get("SLT_PURE_PYTHON") or _compiled is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

integrate = BACKENDS[BACKEND]
