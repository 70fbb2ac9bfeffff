"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when importable. Setting
``CTDSAT_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS: dict[str, ModuleType] = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

if os.environ.get("CTDSAT_PURE_PYTHON") == "1" or _ckernels is None:
    DEFAULT = "python"
else:
    DEFAULT = "cython"


def get(name: str | None = None) -> ModuleType:
    name = name or DEFAULT
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
