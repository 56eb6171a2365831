"""Backend selection for the field kernels.

The compiled extension is used when it is importable; set
``LERBEAM_PURE_PYTHON=1`` to force the NumPy implementation.
"""

import os

from . import _kernels_py

try:
    if os.environ.get("LERBEAM_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-python backend requested")
    from . import _kernels as _active
    BACKEND = "cython"
except ImportError:
    _active = _kernels_py
    BACKEND = "python"

steering_matrix = _active.steering_matrix
pattern_power = _active.pattern_power
pattern_power_grid = _active.pattern_power_grid
set_num_threads = _active.set_num_threads
get_num_threads = _active.get_num_threads


def get_backend(name: str):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
