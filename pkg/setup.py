"""Build script: compiles the double-dummy search kernel when Cython is available.

The package is fully functional without the extension (a pure-Python twin of
the kernel is selected at import time), so a failed or skipped compilation
only costs speed.
"""

import os

from setuptools import setup

_PYX = "src/bridgebid/dds/_search_cy.pyx"

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None and os.path.exists(_PYX):
    ext_modules = cythonize([_PYX], compiler_directives={"language_level": "3"})
else:
    ext_modules = []

setup(ext_modules=ext_modules)
