#!/usr/bin/env python
import os
from ham_bsde import __version__

try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup

with open(os.path.join(os.path.dirname(__file__), "README.md")) as f:
    long_description = f.read()

with open(os.path.join(os.path.dirname(__file__), "requirements.txt")) as f:
    install_requires = [line.strip() for line in f if line.strip() and not line.startswith("#")]

sdict = {
    "name": "ham-bsde",
    "version": __version__,
    "description": "Homotopy series solver for backward and forward-backward SDEs",
    "long_description": long_description,
    "long_description_content_type": "text/markdown",
    "keywords": ["BSDE", "FBSDE", "homotopy analysis", "series solution", "PDE"],
    "license": "GPLV3",
    "packages": ["ham_bsde"],
    "package_data": {"ham_bsde": ["fixtures/*.json"]},
    "install_requires": install_requires,
    "extras_require": {"test": ["pytest>=6.2"]},
    "entry_points": {"console_scripts": ["ham-bsde = ham_bsde.cli:main"]},
    "python_requires": ">=3.8",
    "classifiers": [
        "Development Status :: 4 - Beta",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
}

setup(**sdict)
