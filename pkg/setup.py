"""Build hook for the optional compiled kernels.

The package is fully functional without the extension; if Cython or a C
compiler is unavailable the build falls back to the pure numpy backend.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "qcl._kernels._fast",
                sources=["src/qcl/_kernels/_fast.pyx"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
