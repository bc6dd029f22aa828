"""Select the kernel backend at import time.

The compiled ``_ckernels`` extension is used when it has been built; set
``OSCNET_PURE_PYTHON=1`` to force the pure-Python fallback.
"""

import os

from . import _pykernels

python_kernels = _pykernels

compiled_kernels = None
if os.environ.get("OSCNET_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
NAME = "cython" if compiled_kernels is not None else "python"
