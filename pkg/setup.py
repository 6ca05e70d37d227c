import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "fbmilt._kernels",
                ["src/fbmilt/_kernels.pyx"],
                extra_compile_args=["-O3", "-ffast-math"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback in fbmilt._kernels_py is used when the
    # extension is unavailable; the package stays installable.
    extensions = []

setup(ext_modules=extensions)
