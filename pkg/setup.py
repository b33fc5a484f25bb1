"""Build the optional Cython jet kernel.

The package works without it: ``slantmap.exprlang.jets`` falls back to the
pure-Python evaluator when the extension cannot be imported.
"""
import os

from setuptools import setup


def ext_modules():
    if os.environ.get("SLANTMAP_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "slantmap.exprlang._jetkernel",
        ["src/slantmap/exprlang/_jetkernel.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O2"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=ext_modules())
