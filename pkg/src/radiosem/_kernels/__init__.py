"""Hot loops behind a backend switch.

The compiled ``_los`` extension is used when it was built; otherwise the
pure-Python ``_pylos`` module is. Setting ``RADIOSEM_PURE_PYTHON=1`` forces
the fallback.
"""
import os

from . import _pylos

BACKEND = "python"
_impl = _pylos

if os.environ.get("RADIOSEM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _los as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pylos


def backends() -> dict:
    """All importable backends by name, for benchmarks and parity tests."""
    found = {"python": _pylos}
    try:
        from . import _los

        found["cython"] = _los
    except ImportError:
        pass
    return found


def bresenham(a, b):
    return _impl.bresenham(a, b)


def los_ratio_field(buildings, tx: int, ty: int):
    return _impl.los_ratio_field(buildings, int(tx), int(ty))


__all__ = ["BACKEND", "backends", "bresenham", "los_ratio_field"]
