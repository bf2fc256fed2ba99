from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "eqlab._ckernels",
                ["src/eqlab/_ckernels.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    # No Cython: the package still works on the pure-NumPy kernels.
    ext_modules = []

setup(ext_modules=ext_modules)
