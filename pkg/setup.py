"""Build hook for the optional compiled kernels.

The Cython extension is built when Cython, numpy and a C compiler are
available; otherwise the package installs without it and the pure-Python
kernels are used at run time.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("singular2d.ode._kernels", ["src/singular2d/ode/_kernels.pyx"],
                   include_dirs=[numpy.get_include()],
                   extra_compile_args=["-O3", "-ffp-contract=off"],
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except ImportError:  # pragma: no cover - depends on the build host
    ext_modules = []

setup(ext_modules=ext_modules)
