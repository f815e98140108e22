"""Kernel backend selection.

The compiled extension is used when importable; setting
PHASESYNC_PURE_PYTHON=1 forces the numpy fallback. Both backends expose the
same two functions and can also be imported directly for benchmarking.
"""

from __future__ import annotations

import os

from . import reference

if os.environ.get("PHASESYNC_PURE_PYTHON", "") == "1":
    _impl = reference
else:
    try:
        from . import _compiled as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = reference

BACKEND = _impl.BACKEND
power_iterate = _impl.power_iterate
gpm_iterate = _impl.gpm_iterate


def backend_name() -> str:
    return BACKEND
