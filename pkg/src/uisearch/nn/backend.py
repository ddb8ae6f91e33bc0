"""Kernel backend selection.

The hot kernels (3x3 convolution, 2x2 pooling, 2x upsampling and their
backward passes) exist twice: a numba ``@njit`` implementation and a pure
numpy implementation. The active backend is chosen by the ``UISEARCH_BACKEND``
environment variable:

    UISEARCH_BACKEND=auto    numba when importable, numpy otherwise (default)
    UISEARCH_BACKEND=numba   force numba, fail loudly if unavailable
    UISEARCH_BACKEND=numpy   force the pure numpy path

Both backends compute identical math; they may differ in the last float bits
because summation order differs. ``benchmarks/bench_backends.py`` compares
their throughput.
"""

from __future__ import annotations

import os
from types import ModuleType

_ENV_VAR = "UISEARCH_BACKEND"
_active: ModuleType | None = None
_active_name = ""


def _resolve(name: str) -> tuple[ModuleType, str]:
    name = name.strip().lower()
    if name not in ("auto", "numba", "numpy"):
        raise ValueError(f"{_ENV_VAR} must be auto|numba|numpy, got {name!r}")
    if name in ("auto", "numba"):
        try:
            from . import kernels_numba

            return kernels_numba, "numba"
        except ImportError:
            if name == "numba":
                raise
    from . import kernels_numpy

    return kernels_numpy, "numpy"


def use_backend(name: str) -> str:
    """Select the kernel backend at runtime; returns the resolved name."""
    global _active, _active_name
    _active, _active_name = _resolve(name)
    return _active_name


def get_kernels() -> ModuleType:
    """The active kernel module, resolving from the environment on first use."""
    if _active is None:
        use_backend(os.environ.get(_ENV_VAR, "auto"))
    assert _active is not None
    return _active


def backend_name() -> str:
    get_kernels()
    return _active_name


def available_backends() -> list[str]:
    names = []
    try:
        from . import kernels_numba  # noqa: F401

        names.append("numba")
    except ImportError:
        pass
    names.append("numpy")
    return names
