from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension("smachine._fastcount", ["src/smachine/_fastcount.pyx"]),
]

setup(ext_modules=cythonize(extensions, language_level=3))
