"""VH-Twin: clustered federated twinning simulator for wireless traffic.

The heavy lifting lives in the `_core` extension module; this package simply
re-exports it so `import vhtwin` works both from an installed wheel and from a
plain CMake build directory on PYTHONPATH.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__ as _core_doc
except ImportError:  # in-tree build: extension sits next to the package on PYTHONPATH
    from _core import *  # noqa: F401,F403
    from _core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
