from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "max3section._kernels",
                ["src/max3section/_kernels.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-Python fallback backend is selected at import time; the package
    # works without the compiled kernels.
    ext_modules = []

setup(ext_modules=ext_modules)
