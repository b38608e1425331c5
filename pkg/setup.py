"""Build script.

The package is pure Python.  When Cython is importable the hot modules are
also compiled to extension modules, which run the same code about twice as
fast; set EQSIMP_PURE=1 to skip that.  A failed compile is not fatal.
"""
import os

from setuptools import setup

HOT = ["axioms", "collection", "simplifier", "valuation"]


def extensions():
    if os.environ.get("EQSIMP_PURE"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    exts = cythonize(
        [f"src/eqsimp/{name}.py" for name in HOT],
        compiler_directives={"language_level": 3},
        quiet=True,
    )
    for ext in exts:
        ext.optional = True
    return exts


setup(ext_modules=extensions())
