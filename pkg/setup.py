import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

compiler_directives = {
    "boundscheck": False,
    "wraparound": False,
    "cdivision": True,
    "language_level": "3",
}

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "monoreg._kernels._core",
                ["src/monoreg/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives=compiler_directives,
    )

setup(ext_modules=ext_modules)
