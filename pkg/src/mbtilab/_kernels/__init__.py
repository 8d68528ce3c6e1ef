"""Hot numeric kernels with a compiled implementation and a pure fallback.

The compiled extension is preferred when importable; setting MBTILAB_PURE=1
forces the pure-numpy routines. Both produce bit-identical results, so the
choice affects speed only. BACKEND names the selected implementation.
"""

from __future__ import annotations

import os

from mbtilab._kernels import split_py

BACKEND = "python"
best_split = split_py.best_split

if os.environ.get("MBTILAB_PURE") != "1":
    try:
        from mbtilab._kernels import _split

        best_split = _split.best_split
        BACKEND = "compiled"
    except ImportError:
        pass

__all__ = ["BACKEND", "best_split", "split_py"]
