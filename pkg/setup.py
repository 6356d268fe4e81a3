"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure numpy
fallback is selected at import time), so a failed compile downgrades to
a warning instead of breaking the install.
"""

import sys
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    # Any compiler failure leaves us with the pure-Python kernels.
    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn(f"native kernel build skipped: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"native kernel build skipped for {ext.name}: {exc}")


def make_extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError as exc:
        warnings.warn(f"native kernels not built ({exc}); using pure-Python fallback")
        return []
    ext = Extension(
        "solspec._kernels._native",
        ["src/solspec/_kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
