"""Kernel backend selection.

Compiled extensions are preferred when built; the vectorized numpy fallbacks
are drop-in replacements.  The raster fallback is bit-identical to the
compiled raster kernel; the classifier kernels agree to float rounding.
Set ``PROTVIEW_BACKEND=numpy`` or ``PROTVIEW_BACKEND=native`` to force one.
"""

from __future__ import annotations

import os

from . import numpy_backend

_choice = os.environ.get("PROTVIEW_BACKEND", "").strip().lower()
if _choice not in ("", "native", "numpy"):
    raise RuntimeError(f"PROTVIEW_BACKEND must be 'native' or 'numpy', got {_choice!r}")


def _import_native(name: str):
    if _choice == "numpy":
        return None
    try:
        import importlib

        return importlib.import_module(f".{name}", __package__)
    except ImportError:
        if _choice == "native":
            raise RuntimeError(
                f"PROTVIEW_BACKEND=native but {name} is not built; "
                "run: python setup.py build_ext --inplace"
            ) from None
        return None


_raster = _import_native("_native") or numpy_backend
_net = _import_native("_convnet") or numpy_backend

BACKEND = "native" if _raster is not numpy_backend else "numpy"
NET_BACKEND = "native" if _net is not numpy_backend else "numpy"

raster_scene = _raster.raster_scene
conv2d_forward = _net.conv2d_forward
conv2d_grad_w = _net.conv2d_grad_w
maxpool_forward = _net.maxpool_forward
maxpool_backward = _net.maxpool_backward


def available_backends() -> dict[str, object]:
    """Name -> raster module for every importable backend (benchmark use)."""
    out: dict[str, object] = {"numpy": numpy_backend}
    try:
        from . import _native

        out["native"] = _native
    except ImportError:
        pass
    return out


def available_net_backends() -> dict[str, object]:
    """Name -> classifier-kernel module for every importable backend."""
    out: dict[str, object] = {"numpy": numpy_backend}
    try:
        from . import _convnet

        out["native"] = _convnet
    except ImportError:
        pass
    return out
