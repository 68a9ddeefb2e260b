"""Build the optional compiled oracle kernel.

When Cython or a C compiler is unavailable the package still installs; the
oracle then uses its pure-Python kernel.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("castnorm.oracle._ckernel", ["src/castnorm/oracle/_ckernel.pyx"],
                   extra_compile_args=["-O3"])],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
