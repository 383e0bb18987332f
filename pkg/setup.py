"""Build hook: compile the optional bit-kernel extension.

The extension is marked optional so a missing/broken C toolchain degrades to
the pure-numpy fallback backend instead of failing the install.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "rmlab._kernels._bitsc",
                ["src/rmlab/_kernels/_bitsc.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
