import setuptools
import os
import sys

sys.path.append(os.path.join(os.path.dirname(__file__), "src"))
import pycellfree

setuptools.setup(
    name="pycellfree",
    version=pycellfree.__version__,
    package_dir={"": "src"},
    packages=setuptools.find_packages("src"),
    provides=setuptools.find_packages("src"),
    install_requires=open("requirements.txt").readlines(),
    python_requires=">=3.8",
    entry_points={
        "console_scripts": [
            "cellfree = pycellfree.cli:main",
        ]
    }
)
