"""Localization of excitations in interacting qubit chains with engineered on-site energies."""
from ._accel import backend
from .sequences import (
    SequenceError,
    SequenceSpec,
    Variant,
    base,
    energy,
    mod3,
    mod6,
    pdc,
    perturb,
    random_sequence,
    section,
)
from .single_particle import ChainConfig

__version__ = "0.1.0"

__all__ = [
    "ChainConfig",
    "SequenceError",
    "SequenceSpec",
    "Variant",
    "backend",
    "base",
    "energy",
    "mod3",
    "mod6",
    "pdc",
    "perturb",
    "random_sequence",
    "section",
    "__version__",
]
