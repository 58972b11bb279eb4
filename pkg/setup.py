"""Build script for the compiled simulation kernel.

The extension is optional at runtime: the package falls back to a pure
Python kernel with identical semantics when the compiled module is
missing. Floating point contraction is disabled so both kernels perform
the same IEEE operations in the same order.
"""

from setuptools import Extension, setup

from Cython.Build import cythonize

extensions = [
    Extension(
        "peerbalance._kernel",
        ["src/peerbalance/_kernel.pyx"],
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
