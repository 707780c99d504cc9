from ._backend import BACKEND_NAME, available_backends, kernels
from .core import Adam, ForwardCache, Mlp, Sgd, StaleCacheError, MODEL_FORMAT_VERSION

__all__ = [
    "Adam",
    "BACKEND_NAME",
    "ForwardCache",
    "MODEL_FORMAT_VERSION",
    "Mlp",
    "Sgd",
    "StaleCacheError",
    "available_backends",
    "kernels",
]
