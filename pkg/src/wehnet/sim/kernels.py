"""Backend selection for the slot kernel.

The compiled extension is used when it was built; otherwise the NumPy
version.  Set ``WEHNET_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _kernel_py

python_slot_kernel = _kernel_py.slot_kernel

try:
    from ._kernel import slot_kernel as compiled_slot_kernel
except ImportError:  # extension not built
    compiled_slot_kernel = None

if compiled_slot_kernel is not None and os.environ.get("WEHNET_BACKEND", "").lower() != "python":
    BACKEND = "cython"
    slot_kernel = compiled_slot_kernel
else:
    BACKEND = "python"
    slot_kernel = python_slot_kernel


def get_kernel(backend: str | None = None):
    """Kernel for ``backend`` ('cython' or 'python'); the import-time default if None."""
    if backend is None:
        return slot_kernel
    if backend == "python":
        return python_slot_kernel
    if backend == "cython":
        if compiled_slot_kernel is None:
            raise RuntimeError("compiled kernel is not available; build the extension first")
        return compiled_slot_kernel
    raise ValueError(f"unknown backend {backend!r}")
