"""Builds the optional compiled kernels; the package falls back to the
pure-numpy implementations when the extension is unavailable."""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "rsrig._kernels._kernels_cy",
    ["src/rsrig/_kernels/_kernels_cy.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level=3))
