"""Builds the _mflab extension by driving the project's CMake build.

Use `pip install -e . --no-build-isolation` (the build needs the system
cmake and the installed pybind11 package).
"""

import os
import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name, sourcedir=""):
        super().__init__(name, sources=[])
        self.sourcedir = os.fspath(Path(sourcedir).resolve())


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        ext_fullpath = Path.cwd() / self.get_ext_fullpath(ext.name)
        build_temp = Path(self.build_temp) / ext.name
        build_temp.mkdir(parents=True, exist_ok=True)

        cmake_args = [
            "-DCMAKE_BUILD_TYPE=Release",
            f"-DPython3_EXECUTABLE={sys.executable}",
        ]
        subprocess.run(["cmake", ext.sourcedir, *cmake_args], cwd=build_temp, check=True)
        subprocess.run(
            ["cmake", "--build", ".", "--target", "_mflab", "--parallel"],
            cwd=build_temp,
            check=True,
        )

        built = list((build_temp / "python" / "mflab").glob("_mflab*.so"))
        if not built:
            raise RuntimeError("cmake did not produce the _mflab extension")
        ext_fullpath.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[0], ext_fullpath)


setup(
    ext_modules=[CMakeExtension("mflab._mflab")],
    cmdclass={"build_ext": CMakeBuild},
)
