import os

from setuptools import Extension, setup

# The compiled kernels are optional: the package falls back to the pure-Python
# backend when the extension is absent. Set SINGTRACE_NO_EXT=1 to skip the build.
ext_modules = []
if os.environ.get("SINGTRACE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "singtrace._kernels._ext",
                    ["src/singtrace/_kernels/_ext.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
