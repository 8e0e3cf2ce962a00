"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
behaviorally identical. `TAXLAB_KERNEL=pure` or `TAXLAB_KERNEL=compiled`
forces a backend (the latter raises if the extension is unavailable).
"""

import os

_requested = os.environ.get("TAXLAB_KERNEL", "").strip().lower()

if _requested not in ("", "pure", "compiled"):
    raise ImportError(
        "TAXLAB_KERNEL must be 'pure' or 'compiled', got %r" % _requested)

if _requested == "pure":
    from . import _pure as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _pure as _impl

BACKEND = _impl.BACKEND_NAME
tax_due_many = _impl.tax_due_many
best_response_many = _impl.best_response_many
best_response = _impl.best_response


def load_backend(name):
    """Explicit backend module lookup, used by the parity tests and the
    benchmark so both implementations can be exercised side by side."""
    if name == "pure":
        from . import _pure
        return _pure
    if name == "compiled":
        from . import _core  # type: ignore[attr-defined]
        return _core
    raise ValueError("unknown kernel backend %r" % name)
