"""Build script for the compiled ZNCC kernel.

The package works without the extension (a numpy fallback is selected at
import time); the extension is only a speedup for the hot correlation loop.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/lastseen/kernels/_zncc_cy.pyx",
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
