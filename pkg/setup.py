import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "anisoinc._kernels",
                ["src/anisoinc/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Pure-python fallback in anisoinc._kernels_np covers every kernel.
    ext_modules = []

setup(ext_modules=ext_modules)
