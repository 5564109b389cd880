"""Travelling-equilibrium solver for quantitative traits tracking a moving optimum.

The heavy lifting lives in the C++ extension ``mopt._core``; this package
re-exports its public surface.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = _core_doc
