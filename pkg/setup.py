"""Builds the optional Cython kernel; the package falls back to pure numpy if unavailable."""
import sys

from setuptools import setup


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        print(f"spinspiral: Cython/numpy unavailable ({exc}); building pure-Python only",
              file=sys.stderr)
        return []
    ext = Extension(
        "spinspiral._kernels",
        ["src/spinspiral/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
