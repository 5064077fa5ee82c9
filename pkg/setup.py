"""Build script for the optional compiled tree kernels.

The package works without the extension (a pure numpy implementation is
selected at import time), so the build is marked optional: a missing or
failing C toolchain degrades to the fallback instead of breaking install.

-ffp-contract=off keeps the compiled kernels bit-identical to the numpy
lane (no FMA contraction of the split-gain arithmetic).
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "fairpatch._kernels._ctree",
        ["src/fairpatch/_kernels/_ctree.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
