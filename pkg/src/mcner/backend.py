"""Kernel backend selection.

The hot numeric kernels (fused multi-head attention and layer norm, forward
and backward) exist twice: a numba-compiled version and a pure-numpy
version.  The active backend is chosen once per process:

* ``MCNER_BACKEND=numpy`` forces the pure-numpy path,
* ``MCNER_BACKEND=numba`` forces numba (raises if numba cannot compile),
* unset: numba when importable, numpy otherwise.

``set_backend`` overrides the choice at runtime (tests, benchmarks).
"""

from __future__ import annotations

import os

ENV_VAR = "MCNER_BACKEND"
_CHOICES = ("numba", "numpy")

_active_name: str | None = None
_active_module = None


def _resolve(name: str | None):
    from . import kernels_numpy

    if name is None:
        name = os.environ.get(ENV_VAR) or None
    if name is None:
        try:
            from . import kernels_numba
            return "numba", kernels_numba
        except ImportError:
            return "numpy", kernels_numpy
    if name not in _CHOICES:
        raise ValueError(f"{ENV_VAR} must be one of {_CHOICES}, got {name!r}")
    if name == "numpy":
        return "numpy", kernels_numpy
    from . import kernels_numba
    return "numba", kernels_numba


def active_backend() -> str:
    """Name of the backend currently in use ("numba" or "numpy")."""
    global _active_name, _active_module
    if _active_module is None:
        _active_name, _active_module = _resolve(None)
    return _active_name


def kernels():
    """The active kernel module."""
    active_backend()
    return _active_module


def set_backend(name: str | None) -> str:
    """Select a backend by name; None re-resolves from the environment."""
    global _active_name, _active_module
    _active_name, _active_module = _resolve(name)
    return _active_name
