"""Build the optional compiled kernel; the package works without it."""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("tilekit._kernel", ["src/tilekit/_kernel.pyx"], include_dirs=[numpy.get_include()])],
        language_level=3,
        quiet=True,
    )
except ImportError:  # no Cython/numpy at build time: pure fallback only
    pass

setup(ext_modules=ext_modules)
