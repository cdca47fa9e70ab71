"""Hot loops behind a backend switch.

The numba backend is used when numba imports cleanly and the environment
variable ``PATHFAIR_NUMBA`` is not set to ``0``. The numpy backend computes
bit-identical results and is always importable as ``kernels.numpy_backend``.
"""

import os

from . import _numpy_impl as numpy_backend
from ._common import seed_words, slot_value

_wanted = os.environ.get("PATHFAIR_NUMBA", "1").strip().lower() not in {"0", "false", "no", "off"}

numba_backend = None
if _wanted:
    try:
        from . import _numba_impl as numba_backend
    except ImportError:  # numba missing or broken
        numba_backend = None

active = numba_backend if numba_backend is not None else numpy_backend
BACKEND = "numba" if active is numba_backend else "numpy"

digest_mod = active.digest_mod
path_table = active.path_table
any_corrupted_path = active.any_corrupted_path
any_regular_choice = active.any_regular_choice

__all__ = [
    "BACKEND", "active", "numpy_backend", "numba_backend", "seed_words", "slot_value",
    "digest_mod", "path_table", "any_corrupted_path", "any_regular_choice",
]
