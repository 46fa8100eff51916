"""Pick the compiled kernels when available, else the numpy fallback.

Set ``HOUGHFBP_PURE=1`` to force the fallback.
"""
import os

from . import _kernels_py

_compiled = None
if os.environ.get("HOUGHFBP_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

kernels = _compiled if _compiled is not None else _kernels_py
NAME = kernels.NAME


def available():
    """Names of the usable kernel backends, compiled first."""
    names = []
    if _compiled is not None:
        names.append(_compiled.NAME)
    names.append(_kernels_py.NAME)
    return names


def use(name):
    """Make ``name`` the default backend for every later call."""
    global kernels, NAME
    kernels = get(name)
    NAME = kernels.NAME


def get(name=None):
    if name is None:
        return kernels
    if name == _kernels_py.NAME:
        return _kernels_py
    if _compiled is not None and name == _compiled.NAME:
        return _compiled
    raise ValueError(f"kernel backend {name!r} is not available")
