"""Minimal tensor ops with hand-derived gradients, SGD, and backends."""

from . import ops
from .backend import available_backends, backend_name, get_kernels, use_backend
from .optim import Parameter, sgd_step

__all__ = [
    "ops",
    "available_backends",
    "backend_name",
    "get_kernels",
    "use_backend",
    "Parameter",
    "sgd_step",
]
