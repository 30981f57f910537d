"""Limiting loss distributions for large homogeneous loan portfolios.

Assets and liabilities of every loan follow correlated geometric Brownian
motions driven by one aggregate factor; optionally a compound Poisson process
of downward jumps hits all assets at once. The package provides the limiting
(large-portfolio) loss law in closed form or as a Poisson mixture, the finite
portfolio loss distribution, a Monte Carlo oracle and a CSV command line.
"""

from .continuous import ContinuousLossLaw, Shape, loss_covariance, solve_monotone_rho
from .errors import (
    BracketError,
    ConfigError,
    DegenerateModelError,
    DomainError,
    PortlossError,
    QuadratureError,
    UnsupportedLawError,
    ValidationError,
)
from .jump import Atom, JumpLossLaw, convolution_density
from .model import (
    NO_JUMPS,
    ConstantJumps,
    ContractParams,
    DerivedParams,
    ExponentialJumps,
    JumpSpec,
    asset_moments,
    derive,
)
from .numerics import QuadratureSpec, SeriesSpec

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "BracketError",
    "ConfigError",
    "ConstantJumps",
    "ContinuousLossLaw",
    "ContractParams",
    "DegenerateModelError",
    "DerivedParams",
    "DomainError",
    "ExponentialJumps",
    "JumpLossLaw",
    "JumpSpec",
    "NO_JUMPS",
    "PortlossError",
    "QuadratureError",
    "QuadratureSpec",
    "SeriesSpec",
    "Shape",
    "UnsupportedLawError",
    "ValidationError",
    "asset_moments",
    "convolution_density",
    "derive",
    "loss_covariance",
    "solve_monotone_rho",
]
