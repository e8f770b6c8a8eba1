import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "nearlift.kernels._miller",
                ["src/nearlift/kernels/_miller.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Without Cython the package still installs; the pure-numpy kernel is
    # selected at import time.
    extensions = []

setup(ext_modules=extensions)
