"""Build script.

The package is pure Python except for one optional Cython extension,
``nosekam._core``, which holds the hot integration kernels.  If Cython or a
C compiler is unavailable the build falls back to the pure-Python kernels in
``nosekam.dynamics.pure`` (selected automatically at import time).
"""
import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, otherwise warn and continue."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing etc.
            print(f"warning: building nosekam._core failed ({exc}); "
                  "falling back to pure-Python kernels")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "falling back to pure-Python kernels")


ext_modules = []
if not os.environ.get("NOSEKAM_PURE_BUILD"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "nosekam._core",
                    ["src/nosekam/_core.pyx"],
                    # -ffp-contract=off keeps the compiled kernels bit-identical
                    # to the pure-Python fallback (no FMA contraction).
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        print("warning: Cython not available; building pure-Python only")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
