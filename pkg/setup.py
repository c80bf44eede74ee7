import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TCAMSIM_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "tcamsim._discharge",
                    ["src/tcamsim/_discharge.pyx"],
                    # -ffp-contract=off keeps the compiled kernel bit-identical
                    # to the pure-Python fallback (no FMA contraction).
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
