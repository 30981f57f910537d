"""Contract parameters, systemic jump specification and derived aggregates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import DegenerateModelError, ValidationError
from .numerics import std_normal_cdf

# Beyond this rate an exponential jump law is treated as "no jumps" when
# computing the compensator, avoiding cancellation in 1 - E[exp(-xi)].
GAMMA_INFINITY_THRESHOLD = 1e8


def _finite(name, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValidationError(name, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(name, "must be finite")


@dataclass(frozen=True)
class ContractParams:
    """Per-loan asset and liability coefficients and the default horizon.

    Assets follow a GBM with drift ``mu`` and volatility ``sigma`` loading
    ``sqrt(rho)`` on the aggregate factor; liabilities a GBM with drift
    ``alpha`` and volatility ``beta`` loading ``sqrt(theta)`` on the same factor.
    """

    mu: float
    alpha: float
    sigma: float
    beta: float
    rho: float
    theta: float
    A0: float
    B0: float
    T: float

    def __post_init__(self):
        for name in ("mu", "alpha", "sigma", "beta", "rho", "theta", "A0", "B0", "T"):
            _finite(name, getattr(self, name))
        for name in ("sigma", "beta"):
            if getattr(self, name) < 0:
                raise ValidationError(name, "volatility must be >= 0")
        for name in ("rho", "theta"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(name, "correlation weight must lie in [0, 1]")
        for name in ("A0", "B0", "T"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, "must be > 0")


@dataclass(frozen=True)
class ExponentialJumps:
    """Jump sizes ~ Exp(gamma), mean 1/gamma."""

    gamma: float

    def __post_init__(self):
        _finite("gamma", self.gamma)
        if not self.gamma > 0:
            raise ValidationError("gamma", "exponential rate must be > 0")

    def laplace(self) -> float:
        """E[exp(-xi)]."""
        return self.gamma / (self.gamma + 1.0)

    def mean_factor(self) -> float:
        if self.gamma > GAMMA_INFINITY_THRESHOLD:
            return 0.0
        return 1.0 / (self.gamma + 1.0)

    def second_factor(self) -> float:
        """E[(1 - exp(-xi))**2] = 1 - 2g/(g+1) + g/(g+2), simplified."""
        g = self.gamma
        return 2.0 / ((g + 1.0) * (g + 2.0))


@dataclass(frozen=True)
class ConstantJumps:
    """Every jump has the same size ``c``."""

    c: float

    def __post_init__(self):
        _finite("c", self.c)
        if not self.c > 0:
            raise ValidationError("c", "constant jump size must be > 0")

    def laplace(self) -> float:
        return math.exp(-self.c)

    def mean_factor(self) -> float:
        return -math.expm1(-self.c)

    def second_factor(self) -> float:
        return math.expm1(-self.c) ** 2


SizeLaw = Union[ExponentialJumps, ConstantJumps]


@dataclass(frozen=True)
class JumpSpec:
    """Systemic compound-Poisson jumps subtracted from every log asset value."""

    lam: float = 0.0
    size_law: Optional[SizeLaw] = None

    def __post_init__(self):
        _finite("lambda", self.lam)
        if self.lam < 0:
            raise ValidationError("lambda", "jump intensity must be >= 0")
        if self.size_law is not None and not isinstance(self.size_law, (ExponentialJumps, ConstantJumps)):
            raise ValidationError("jump_law", f"unsupported size law {self.size_law!r}")

    @property
    def active(self) -> bool:
        """True when jumps actually occur."""
        return self.lam > 0 and self.size_law is not None

    @classmethod
    def none(cls) -> "JumpSpec":
        return cls()

    @classmethod
    def exponential(cls, lam: float, gamma: float) -> "JumpSpec":
        return cls(lam, ExponentialJumps(gamma))

    @classmethod
    def constant(cls, lam: float, c: float) -> "JumpSpec":
        return cls(lam, ConstantJumps(c))


NO_JUMPS = JumpSpec()


@dataclass(frozen=True)
class DerivedParams:
    Sigma: float
    zeta: float
    Lambda: float
    Xi: float
    p: float
    XiTilde: float
    pTilde: float
    # horizon carried along so laws need not keep the full contract
    T: float = field(default=1.0, compare=False)


def jump_mean_factor(jump: JumpSpec) -> float:
    """1 - E[exp(-xi)], the per-jump compensator factor; 0 without a size law."""
    if jump.size_law is None:
        return 0.0
    return jump.size_law.mean_factor()


def derive(params: ContractParams, jump: JumpSpec = NO_JUMPS) -> DerivedParams:
    """Aggregate volatilities, drift offsets and default probabilities.

    Raises :class:`DegenerateModelError` when the log asset-liability ratio
    has zero volatility.
    """
    s, b = params.sigma, params.beta
    rho, theta = params.rho, params.theta
    T = params.T
    zeta2 = s * s * (1.0 - rho) + b * b * (1.0 - theta)
    Lambda = s * math.sqrt(rho) - b * math.sqrt(theta)
    Sigma2 = s * s + b * b - 2.0 * s * b * math.sqrt(rho * theta)
    if Sigma2 <= 0.0:
        raise DegenerateModelError(
            "Sigma = 0: the asset/liability ratio is deterministic and defaults are all-or-nothing"
        )
    Sigma = math.sqrt(Sigma2)
    zeta = math.sqrt(max(zeta2, 0.0))
    Xi = math.log(params.B0 / params.A0) - (params.mu - params.alpha - 0.5 * (s * s - b * b)) * T
    XiTilde = Xi - jump.lam * jump_mean_factor(jump) * T
    scale = Sigma * math.sqrt(T)
    return DerivedParams(
        Sigma=Sigma,
        zeta=zeta,
        Lambda=Lambda,
        Xi=Xi,
        p=std_normal_cdf(Xi / scale),
        XiTilde=XiTilde,
        pTilde=std_normal_cdf(XiTilde / scale),
        T=T,
    )


def asset_moments(params: ContractParams, jump: JumpSpec = NO_JUMPS, t: Optional[float] = None):
    """Mean and variance of the terminal asset value at time ``t`` (default T).

    The compensator keeps the mean at ``A0 exp(mu t)``; jumps only add spread.
    """
    if t is None:
        t = params.T
    if t < 0:
        raise ValidationError("t", "time must be >= 0")
    mean = params.A0 * math.exp(params.mu * t)
    second = jump.size_law.second_factor() if jump.size_law is not None else 0.0
    var = mean * mean * math.expm1(params.sigma ** 2 * t + jump.lam * t * second)
    return mean, var
