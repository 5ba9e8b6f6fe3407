"""Spectral-diffusion simulator for qubit T1 fluctuations caused by TLS defects."""

from ._core import *  # noqa: F401,F403
from ._core import (
    ConfigError,
    DomainError,
    FitError,
    GenerationError,
    InsufficientDataError,
    TlsfluctError,
)

__version__ = "0.1.0"
