"""Build script: compiles the optional Cython CRF kernels.

The package works without the extension (a pure numpy fallback is selected
at import time), so compilation failures are downgraded to a warning.
"""

import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/adetag/_crf_cy.pyx",
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
    include_dirs = [np.get_include()]
except Exception as exc:  # pragma: no cover
    warnings.warn(f"Cython CRF kernels not built, using pure-Python fallback: {exc}")
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)
