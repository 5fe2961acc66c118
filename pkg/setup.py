"""Build script: compiles the optional C core.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here only costs speed, not functionality.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "hsdenoise._core",
                ["src/hsdenoise/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    sys.stderr.write(
        "hsdenoise: skipping C core build (%s); using numpy fallback\n" % exc
    )
    ext_modules = []

setup(ext_modules=ext_modules)
