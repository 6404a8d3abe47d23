"""Build script: compiles the optional QP kernel extension.

The extension is best-effort: if Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-Python kernel at import
time (see skewlab.maxmargin).
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "skewlab._qp_ext",
                ["src/skewlab/_qp_ext.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"skewlab: skipping compiled QP kernel ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
