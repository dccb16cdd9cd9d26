import os

from setuptools import Extension, setup

# The compiled kernels are optional: when Cython (or a C compiler) is
# unavailable, or NAKABER_PURE_PYTHON is set, the package falls back to
# the pure-Python twin at import time.
ext_modules = []
if not os.environ.get("NAKABER_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "nakaber._fastkernels",
                    ["src/nakaber/_fastkernels.pyx"],
                    # fp-contract off keeps the compiled arithmetic
                    # step-for-step comparable with the pure backend
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "nonecheck": False,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
