"""Build hook for the optional compiled kernel extension.

The package is fully functional without the extension: soupkit._kernels
falls back to the NumPy implementation when the compiled module is absent
or fails to build. `-ffp-contract=off` keeps the compiled kernels
bit-identical to the fallback (no FMA contraction of a*b+c).
"""

import os
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Treat extension build failures as a downgrade, not an error."""

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # compiler missing, flags rejected, ...
            print(
                f"warning: building {ext.name} failed ({exc}); "
                "the pure NumPy kernels will be used instead",
                file=sys.stderr,
            )


ext_modules = []
if os.environ.get("SOUPKIT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "soupkit._kernels._fast",
                    sources=["src/soupkit/_kernels/_fast.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        print(
            "warning: Cython not available; the pure NumPy kernels will be used",
            file=sys.stderr,
        )

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
