import os

import numpy as np
from setuptools import Extension, setup

# The compiled kernels are an optional accelerator; the package falls back to
# the numpy implementation when the extension is absent (UCLAB_NO_EXT=1 skips
# the build entirely).
if os.environ.get("UCLAB_NO_EXT"):
    ext_modules = []
else:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "uclab._kernels._core",
                ["src/uclab/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
