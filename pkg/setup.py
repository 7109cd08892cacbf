import os

from setuptools import setup

ext_modules = []
if os.environ.get("AIRYGAP_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:  # build the pure-Python package
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "airygap._kernels_c",
                    ["src/airygap/_kernels_c.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
