#!/usr/bin/env python3
"""
Setup script for haar-factor.
"""

from setuptools import setup, find_packages


# Read the README file
def read_readme():
    with open("README.md", "r", encoding="utf-8") as f:
        return f.read()


# Runtime requirements only; pytest and black live under extras
def read_requirements():
    with open("requirements.txt", "r", encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip() and not line.startswith("#")]
    return [line for line in lines if not line.startswith(("pytest", "black"))]


setup(
    name="haar-factor",
    version="0.1.0",
    description="Exact, certificate-producing factorizations of operators on the Haar system in SL-infinity",
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.9",
    install_requires=read_requirements(),
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "black>=22.0.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "haar-factor=haar_factor.cli:cli_main",
            "haarfactor=haar_factor.cli:cli_main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
