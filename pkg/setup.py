"""Build script. Compiles the shortest-path/scan kernels when a C toolchain
is available; the package falls back to pure-Python kernels otherwise."""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "qhgeo._ckernels",
                ["src/qhgeo/_ckernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    sys.stderr.write(f"qhgeo: skipping compiled kernels ({exc}); using pure-Python fallback\n")

setup(ext_modules=ext_modules)
