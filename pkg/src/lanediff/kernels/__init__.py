"""Hot-kernel dispatch: compiled Cython core with a pure numpy fallback.

The compiled backend is used when the extension built; set LANEDIFF_PURE=1
to force the fallback. ``BACKEND`` records which one is active and
``available_backends()`` returns every importable backend keyed by name
(used by the parity tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("LANEDIFF_PURE"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

conv1d_forward = _impl.conv1d_forward
conv1d_backward = _impl.conv1d_backward
conv2d_forward = _impl.conv2d_forward
conv2d_backward = _impl.conv2d_backward
nearest_sqdist = _impl.nearest_sqdist
stroke_lines = _impl.stroke_lines


def available_backends() -> dict:
    backends = {"pure": _pure}
    try:
        from . import _ckernels
        backends["compiled"] = _ckernels
    except ImportError:
        pass
    return backends
