"""Build the optional Cython tape kernel; the package works without it."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CURVEDCHECK_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "curvedcheck._tape",
                    ["src/curvedcheck/_tape.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
