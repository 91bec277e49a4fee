"""Build script for the optional compiled kernel extension.

The package installs and works without the extension (a pure numpy
implementation of every kernel ships in pdlab._kernels.pure); the Cython
module only speeds up the hot inner loops.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "pdlab._kernels._cykernels",
                ["src/pdlab/_kernels/_cykernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
