"""Build script: compiles the hot-loop kernels to a C extension when Cython
is available, otherwise installs with the pure-Python fallback only."""

import sys

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("sbmchroma._kernels_cy", ["src/sbmchroma/_kernels_cy.pyx"])],
        language_level=3,
    )
except Exception as exc:  # noqa: BLE001 - any build problem falls back to pure Python
    print(f"sbmchroma: compiled kernels disabled ({exc}); "
          "using the pure-Python fallback", file=sys.stderr)

setup(ext_modules=ext_modules)
