"""Charge-resolved entanglement of critical free-fermion chains: exact lattice
values and their large-block asymptotics."""

from .errors import AccuracyError, ComputationError, DomainError, SectorEmptyError, UsageError
from .model import ModelSpec, decoupled_spec, xx_spec

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "ComputationError",
    "DomainError",
    "ModelSpec",
    "SectorEmptyError",
    "UsageError",
    "decoupled_spec",
    "xx_spec",
    "__version__",
]
