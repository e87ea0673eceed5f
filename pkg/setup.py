import sys

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("penningcool._kernel",
                   ["src/penningcool/_kernel.pyx"],
                   extra_compile_args=["-O3"])],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"warning: compiled kernel disabled ({exc}); "
          "falling back to the pure-Python kernel", file=sys.stderr)

setup(ext_modules=ext_modules)
