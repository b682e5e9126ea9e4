"""Build script for the compiled inner-solver extension.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-NumPy solver at import
time.  To build in place for development:

    python setup.py build_ext --inplace

Set REL_ESTIM_SKIP_BUILD=1 to skip the extension entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("REL_ESTIM_SKIP_BUILD"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "relestim._solver_core",
                    sources=["src/relestim/_solver_core.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "language_level": "3",
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
