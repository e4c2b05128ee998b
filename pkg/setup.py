"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); set CYCLE_CENSUS_NO_EXT=1 to skip compilation deliberately.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CYCLE_CENSUS_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "cycle_census._kernels",
                    ["src/cycle_census/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except Exception as exc:  # pragma: no cover - build-environment dependent
        print(f"cycle-census: building without compiled kernels ({exc})")
        ext_modules = []

setup(ext_modules=ext_modules)
