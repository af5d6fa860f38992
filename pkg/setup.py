"""Build script: compiles the optional geometry speedup extension.

The package works without the extension (a numpy fallback is selected at
import time), so the extension is marked optional and any build failure
degrades to the pure-Python path instead of failing the install.
"""

import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("SOLARZONING_PURE_PYTHON"):
    ext = Extension(
        "solarzoning._kernels._speedups",
        ["src/solarzoning/_kernels/_speedups.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
