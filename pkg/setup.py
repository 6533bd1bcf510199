"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension: ``biasaudit.kernels``
falls back to pure-Python implementations at import time.  Any build failure
here (missing compiler, missing Cython) therefore degrades to a working
source-only install instead of aborting.
"""

import logging

from setuptools import setup
from setuptools.command.build_ext import build_ext

log = logging.getLogger("biasaudit.setup")


class optional_build_ext(build_ext):
    """build_ext that tolerates compiler failures."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any build failure is non-fatal
            log.warning("compiled kernels skipped: %s", exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            log.warning("compiled kernel %s skipped: %s", ext.name, exc)


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    return cythonize(
        [
            Extension(
                "biasaudit.kernels._native",
                ["src/biasaudit/kernels/_native.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
