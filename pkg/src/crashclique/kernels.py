"""Kernel backend selection.

The compiled extension `_ckern` is used when it imported cleanly; otherwise,
or when CRASHCLIQUE_PURE=1, the numpy fallback `_pykern` serves the same
contracts. `vander` always comes from the fallback (it is cheap and cached by
callers).
"""
from __future__ import annotations

import os

from . import _pykern

vander = _pykern.vander

if os.environ.get("CRASHCLIQUE_PURE") == "1":
    _impl = _pykern
else:
    try:
        from . import _ckern as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykern

BACKEND: str = _impl.BACKEND
encode = _impl.encode
interpolate = _impl.interpolate
certify_loads = _impl.certify_loads


def backends() -> dict:
    """All importable backends by name, for parity tests and benchmarks."""
    found = {"python": _pykern}
    try:
        from . import _ckern

        found["compiled"] = _ckern
    except ImportError:
        pass
    return found
