"""Kernel backend selection.

The compiled extension is used when it imports; set ``TPAW_PURE_PYTHON=1`` to
force the numpy fallback.
"""

import os

from . import _pykernels as python

compiled = None
if os.environ.get("TPAW_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled
    except ImportError:
        compiled = None

kernels = compiled if compiled is not None else python
NAME = "compiled" if compiled is not None else "python"
