import os

from setuptools import Extension, setup

# Set BEXRELAY_NO_EXT=1 to skip the compiled kernel (pure-Python fallback).
ext_modules = []
if not os.environ.get("BEXRELAY_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("bexrelay._pairkernel", ["src/bexrelay/_pairkernel.pyx"],
                   extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
