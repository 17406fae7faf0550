from __future__ import absolute_import, division, print_function
from os.path import join as pjoin

# Format expected by setup.py and doc/conf.py: string of form "X.Y.Z"
_version_major = 0
_version_minor = 1
_version_micro = ''  # use '' for first of series, number for 1 and above
_version_extra = 'dev'
# _version_extra = ''  # Uncomment this for full releases

# Construct full version string from these.
_ver = [_version_major, _version_minor]
if _version_micro:
    _ver.append(_version_micro)
if _version_extra:
    _ver.append(_version_extra)

__version__ = '.'.join(map(str, _ver))

CLASSIFIERS = ["Development Status :: 3 - Alpha",
               "Environment :: Console",
               "Intended Audience :: Science/Research",
               "License :: OSI Approved :: MIT License",
               "Operating System :: OS Independent",
               "Programming Language :: Python",
               "Topic :: Scientific/Engineering",
               "Topic :: Scientific/Engineering :: Mathematics"]

# Description should be a one-liner:
description = ("icodelab: learn input-affine neural ODEs from trajectories "
               "of driven dynamical systems and check their contraction.")
# Long description will go up on the pypi page
long_description = """

icodelab
========
icodelab is a small laboratory for system identification with neural
ordinary differential equations that see their external input. It trains
input-affine neural ODEs (ICODE) next to NODE, ANODE and CDE baselines on
trajectories of seven benchmark systems, evaluates their predictions, runs
noise / input / scaling sweeps, and checks contraction conditions on the
learned vector fields.

Everything is written in plain numpy: dense Softplus networks with exact
reverse-mode derivatives, Adam, fixed-step RK4 with discretize-then-optimize
gradients, and a cyclic Jacobi eigen-solver.

License
=======
``icodelab`` is licensed under the terms of the MIT license. See the file
"LICENSE" for information on the history of this software, terms & conditions
for usage, and a DISCLAIMER OF ALL WARRANTIES.
"""

NAME = "icodelab"
MAINTAINER = "icodelab developers"
MAINTAINER_EMAIL = ""
DESCRIPTION = description
LONG_DESCRIPTION = long_description
URL = ""
DOWNLOAD_URL = ""
LICENSE = "MIT"
AUTHOR = "icodelab developers"
AUTHOR_EMAIL = ""
PLATFORMS = "OS Independent"
MAJOR = _version_major
MINOR = _version_minor
MICRO = _version_micro
VERSION = __version__
PACKAGE_DATA = {'icodelab': [pjoin('data', '*')]}
REQUIRES = ["numpy", "scipy", "pandas"]
PYTHON_REQUIRES = ">= 3.8"
ENTRY_POINTS = {'console_scripts': ['icodelab = icodelab.cli:main']}
