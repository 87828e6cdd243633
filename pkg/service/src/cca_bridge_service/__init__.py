"""Reference cca-bridge/1 scoring service."""

__version__ = "0.1.0"

from .service import (
    Adapter,
    AdapterBackend,
    RequestValidationError,
    ServiceConfig,
    ServiceStartupError,
    SynthBackend,
    build_backend,
    make_server,
    register_adapter,
    serve,
)

__all__ = [
    "Adapter",
    "AdapterBackend",
    "RequestValidationError",
    "ServiceConfig",
    "ServiceStartupError",
    "SynthBackend",
    "build_backend",
    "make_server",
    "register_adapter",
    "serve",
]
