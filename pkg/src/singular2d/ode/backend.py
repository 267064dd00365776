"""Kernel backend selection.

The compiled extension is used when it imports; setting the environment
variable ``SINGULAR2D_BACKEND=python`` forces the pure-Python kernels
(``compiled`` makes a missing extension an error).  ``use_backend``
switches at run time, which the benchmark and the twin tests rely on.
"""

from __future__ import annotations

import importlib
import os

from . import _kernels_py

__all__ = ["kernels", "backend_name", "use_backend", "available_backends"]

try:
    _compiled = importlib.import_module("singular2d.ode._kernels")
except ImportError:  # extension not built
    _compiled = None

_choice = os.environ.get("SINGULAR2D_BACKEND", "auto").strip().lower()
if _choice == "compiled" and _compiled is None:
    raise ImportError("SINGULAR2D_BACKEND=compiled but the extension is not built")

kernels = _kernels_py if (_choice == "python" or _compiled is None) else _compiled


def backend_name() -> str:
    return "python" if kernels is _kernels_py else "compiled"


def available_backends() -> list[str]:
    return ["python"] + (["compiled"] if _compiled is not None else [])


def use_backend(name: str) -> None:
    """Select ``"python"`` or ``"compiled"`` kernels for subsequent calls."""
    global kernels
    if name == "python":
        kernels = _kernels_py
    elif name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        kernels = _compiled
    else:
        raise ValueError("unknown backend %r" % (name,))
