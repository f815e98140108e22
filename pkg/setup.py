"""Build script for the optional compiled kernels.

The package works without the extension (a numpy fallback is selected at
import time); building it just removes per-iteration Python overhead in the
power-iteration and fixed-point loops.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "phasesync._kernels._compiled",
                ["src/phasesync/_kernels/_compiled.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
