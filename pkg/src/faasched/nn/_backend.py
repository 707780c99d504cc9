"""Kernel backend selection.

The compiled Cython kernels are used when the extension built; otherwise the
numpy kernels take over. Set FAASCHED_KERNELS=python or =cython to force a
backend (forcing cython fails loudly if the extension is missing).
"""

from __future__ import annotations

import os

_requested = os.environ.get("FAASCHED_KERNELS", "auto").lower()
if _requested not in ("auto", "cython", "python"):
    raise RuntimeError(
        f"FAASCHED_KERNELS must be auto, cython, or python (got {_requested!r})"
    )

kernels = None
if _requested in ("auto", "cython"):
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]
    except ImportError:
        if _requested == "cython":
            raise RuntimeError(
                "FAASCHED_KERNELS=cython but the compiled extension is not available"
            ) from None
if kernels is None:
    from . import _kernels_py as kernels  # type: ignore[no-redef]

BACKEND_NAME: str = kernels.NAME


def available_backends():
    """Name -> kernel module for every backend importable here."""
    from . import _kernels_py

    out = {"python": _kernels_py}
    try:
        from . import _kernels_cy

        out["cython"] = _kernels_cy
    except ImportError:
        pass
    return out
