"""Python interface to the hierarchical-leadership flock simulator.

Everything lives in the compiled extension; this package just re-exports it.
"""

from hlflock._core import *  # noqa: F401,F403
from hlflock._core import __doc__  # noqa: F401

__version__ = "0.1.0"
