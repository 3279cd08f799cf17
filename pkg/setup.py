#!/usr/bin/env python3

from setuptools import setup
from setuptools import find_packages


setup(
    name="litechain",
    description="Equilibrium statistics of one-dimensional nearest-neighbor particle chains",
    test_suite="test",
    license="BSD",
    python_requires=">=3.8",
    install_requires=["numpy>=1.17", "scipy>=1.6"],
    packages=find_packages(exclude=("test*", "sim*", "doc*", "examples*")),
    include_package_data=True,
    entry_points={
        "console_scripts": ["litechain = litechain.cli:main"],
    },
)
