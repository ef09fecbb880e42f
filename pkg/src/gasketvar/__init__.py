"""Discrete variational toolkit on the N-corner Sierpinski gasket."""

from .energy import EnergyForm, energy, energy_form, harmonic_extension, holder_check
from .exprs import parse
from .gasket import LevelGraph, ResourceLimitError, build_gasket, refine
from .measure import QuadratureWeights, integrate, vertex_weights
from .solver import ProblemSpec, assemble, lambda_star, minimize_restricted, sweep
from .spectrum import decimation_check, weighted_spectrum

__version__ = "0.1.0"

__all__ = [
    "EnergyForm",
    "LevelGraph",
    "ProblemSpec",
    "QuadratureWeights",
    "ResourceLimitError",
    "assemble",
    "build_gasket",
    "decimation_check",
    "energy",
    "energy_form",
    "harmonic_extension",
    "holder_check",
    "integrate",
    "lambda_star",
    "minimize_restricted",
    "parse",
    "refine",
    "sweep",
    "vertex_weights",
    "weighted_spectrum",
]
