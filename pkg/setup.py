import os
import sys

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None and os.environ.get("LERBEAM_NO_EXT", "") in ("", "0"):
    if sys.platform == "win32":
        compile_args, link_args = ["/O2", "/openmp"], []
    else:
        # fast-math only at compile time: linking with it would set FTZ/DAZ
        # for the whole process
        compile_args = ["-O3", "-ffast-math", "-march=native", "-fopenmp"]
        link_args = ["-fopenmp"]
        if sys.platform.startswith("linux"):
            # glibc SIMD math (vectorized cos)
            link_args += ["-lmvec", "-lm"]
    ext_modules = cythonize(
        [
            Extension(
                "lerbeam._kernels",
                ["src/lerbeam/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=compile_args,
                extra_link_args=link_args,
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
