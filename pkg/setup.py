"""Build script: compiles the Metropolis sweep kernels when Cython is available.

The package works without the extension (a pure-Python fallback is selected
at import time), so a failed or skipped build is not fatal.

No -ffast-math: the compiled kernels must round exactly like the Python
fallback so both backends produce bit-identical trajectories.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "mirrorlat._kernels",
                ["src/mirrorlat/_kernels.pyx"],
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
except ImportError:
    pass

setup(ext_modules=ext_modules)
