"""Build script for the optional compiled raster kernels.

The package works without the extension (a vectorized numpy fallback is
selected at import time); building it just makes rendering much faster:

    python setup.py build_ext --inplace
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    # The raster kernel must stay bit-identical to the numpy fallback, so FP
    # contraction is off there; the classifier kernels have no such contract
    # and take the FMA speedup.
    ext_modules = cythonize(
        [
            Extension(
                "protview.kernels._native",
                sources=["src/protview/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            ),
            Extension(
                "protview.kernels._convnet",
                sources=["src/protview/kernels/_convnet.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=fast", "-funroll-loops"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            ),
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
