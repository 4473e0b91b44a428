"""Build script: compiles the optional Cython kernel extension.

The extension is an accelerator only; if Cython or a C compiler is missing
the build degrades to the pure-Python kernels (same results, slower).
-ffp-contract=off keeps C arithmetic bit-identical to CPython floats so
replay hashes agree across kernel backends.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing: fall back to pure kernels
            print(f"warning: kernel extension not built ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using pure-Python fallback")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension(
        "cobotsim._kernels._core",
        ["src/cobotsim/_kernels/_core.pyx"],
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
