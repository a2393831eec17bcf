"""Hot-kernel backend selection.

The compiled extension is preferred when it imports cleanly; the
pure-numpy twin is always available.  Set ``RSRIG_PURE_PYTHON=1`` to force
the fallback (used by the backend-comparison benchmark and tests).
"""

import os

if os.environ.get("RSRIG_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import BACKEND, cubic_action_roots, e3q3_roots, quartic_action_roots
else:
    try:
        from ._kernels_cy import BACKEND, cubic_action_roots, e3q3_roots, quartic_action_roots
    except ImportError:
        from ._kernels_py import BACKEND, cubic_action_roots, e3q3_roots, quartic_action_roots

KERNEL_BACKEND = BACKEND

__all__ = ["KERNEL_BACKEND", "cubic_action_roots", "e3q3_roots", "quartic_action_roots"]
