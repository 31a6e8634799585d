"""Python bindings for the uca assignment library."""

from ._uca import *  # noqa: F401,F403
from ._uca import __doc__  # noqa: F401
