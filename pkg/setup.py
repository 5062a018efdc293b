"""Build script for the optional compiled reduction kernel.

The package is pure Python plus one Cython extension for the hot loop
(triangle enumeration and boundary-column reduction in pmg.topology).
If the extension cannot be built, installation continues and the package
falls back to the pure-Python kernel at import time.
"""

import os
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


def make_extensions():
    if os.environ.get("PMG_SKIP_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        warnings.warn("Cython not available; building without the compiled kernel")
        return []
    ext = Extension(
        "pmg.topology._reduction",
        sources=["src/pmg/topology/_reduction.pyx"],
        language="c++",
        extra_compile_args=["-O3", "-std=c++11"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


class OptionalBuildExt(build_ext):
    """Build the extension if possible; never fail the install over it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"compiled kernel skipped: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled kernel {ext.name} skipped: {exc}")


setup(ext_modules=make_extensions(), cmdclass={"build_ext": OptionalBuildExt})
