"""Kernel backend selection.

The compiled extension ``szego_lab._core`` is used when it is importable;
otherwise the numpy implementations in ``szego_lab._fallback`` are used.
Set ``SZEGO_LAB_BACKEND=python`` to force the fallback.
"""
import os

from szego_lab import _fallback

BACKEND = "python"
cubic_direct = _fallback.cubic_direct
rk4_direct = _fallback.rk4_direct

if os.environ.get("SZEGO_LAB_BACKEND", "").lower() != "python":
    try:
        from szego_lab import _core
    except ImportError:
        _core = None
    if _core is not None:
        BACKEND = "compiled"
        cubic_direct = _core.cubic_direct
        rk4_direct = _core.rk4_direct


def available_backends():
    """Map backend name -> module exposing ``cubic_direct`` and ``rk4_direct``."""
    out = {"python": _fallback}
    try:
        from szego_lab import _core as core
    except ImportError:
        return out
    out["compiled"] = core
    return out
