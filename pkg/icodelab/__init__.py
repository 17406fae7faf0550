from __future__ import absolute_import, division, print_function
from .version import __version__  # noqa
from .nn_core import *  # noqa
from .vector_fields import *  # noqa
from .integrate import *  # noqa
from .truth_systems import *  # noqa
from .contraction import *  # noqa
from .harness import *  # noqa
