"""Builds the optional compiled kernel extension.

The package works without it (a numpy fallback is selected at import time),
so any failure here downgrades to a pure build instead of aborting.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("CRASHCLIQUE_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext = Extension(
            "crashclique._ckern",
            sources=["src/crashclique/_ckern.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
        )
        ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
    except Exception as exc:  # noqa: BLE001 - fall back to pure python
        print(f"skipping compiled kernels ({exc!r}); pure-python fallback will be used")
        ext_modules = []

setup(ext_modules=ext_modules)
