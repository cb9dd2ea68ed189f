"""Build script: compiles the optional Cython kernels.

If Cython, a C compiler or the MPFR headers are missing the package still
installs and the pure-Python kernels are used instead.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("ABC_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "abctrees._kernels",
                    ["src/abctrees/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    libraries=["mpfr", "gmp", "m"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3", "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )
    except Exception as exc:  # pragma: no cover - build environment dependent
        print(f"building without compiled kernels: {exc}")
        ext_modules = []

setup(ext_modules=ext_modules)
