import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "mcgraph.kernels._ckernels",
        ["src/mcgraph/kernels/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
]

if cythonize is not None:
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
else:
    # Pure-python install; mcgraph.kernels falls back to the numpy backend.
    ext_modules = []

setup(ext_modules=ext_modules)
