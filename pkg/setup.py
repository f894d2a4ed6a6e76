"""Build script: compiles the optional butterfly kernel extension.

The package is fully functional without the extension (a vectorized numpy
fallback is selected at import time); the build therefore degrades gracefully
when Cython or a C compiler is unavailable.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Skip the extension instead of failing the whole install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping compiled kernels ({exc}); "
                  "qrecon will use the numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); "
                  "qrecon will use the numpy fallback")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available; building without compiled kernels")
        return []
    return cythonize(
        [
            Extension(
                "qrecon._butterfly_cy",
                ["src/qrecon/_butterfly_cy.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
