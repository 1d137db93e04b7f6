"""Build script: compiles the optional accelerator extension.

The package works without the extension (a pure NumPy implementation of the
same kernels is selected at import time), so a failed compile only costs
speed.  Complex arithmetic inside the kernels is written out over real
doubles in a fixed order; -ffp-contract=off keeps the compiler from fusing
those operations so the compiled and pure backends produce identical bits.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            print(f"warning: skipping accelerator build ({exc}); "
                  "pure Python kernels will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not compile {ext.name} ({exc}); "
                  "pure Python kernels will be used")


extensions = [
    Extension(
        "eigenfree._kernels._compiled",
        ["src/eigenfree/_kernels/_compiled.pyx"],
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
]

try:
    from Cython.Build import cythonize
    extensions = cythonize(extensions, language_level=3)
except ImportError:
    print("warning: Cython not available; pure Python kernels will be used")
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
