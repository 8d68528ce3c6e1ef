"""Build script: compiles the optional split-search extension.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here degrades to a pure-Python install.
Set MBTILAB_NO_EXT=1 to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup


def extension_modules():
    if os.environ.get("MBTILAB_NO_EXT") == "1":
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "mbtilab._kernels._split",
        ["src/mbtilab/_kernels/_split.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # No FMA contraction: the numpy fallback must be bit-identical.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extension_modules())
