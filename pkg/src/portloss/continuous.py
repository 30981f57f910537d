"""Limiting loss law of a uniform portfolio with stochastic liabilities, no jumps.

The aggregate factor enters the log asset/liability ratio with loading
``Lambda``; conditional on it, loans default independently with probability
``Phi((Sigma Phi^-1(p) - Lambda Y_T / sqrt(T)) / zeta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import special

from .errors import DegenerateModelError, DomainError, ValidationError
from .model import NO_JUMPS, ContractParams, DerivedParams, derive
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    adaptive_integral,
    clamp_probability,
    find_root_increasing,
    gauss_weighted_integral,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)

SHAPE_TOLERANCE = 1e-12
# phi(s) < 1e-300 beyond this point
GAUSS_CUTOFF = 38.0
SQRT_2PI = math.sqrt(2.0 * math.pi)
# portfolio sizes up to which the Gauss-Hermite rule resolves the pmf integrand
PMF_HERMITE_MAX_N = 20


@dataclass(frozen=True)
class Shape:
    kind: str  # "unimodal", "monotone" or "bimodal"
    mode: Optional[float] = None


def _unit_interval(x):
    """Split ``x`` into an array, the interior mask and the normal score of interior points."""
    arr = np.asarray(x, dtype=float)
    inside = (arr > 0.0) & (arr < 1.0)
    z = np.zeros_like(arr)
    if np.any(inside):
        z[inside] = std_normal_quantile(clamp_probability(arr[inside]))
    return arr, inside, z


def _as_output(x, values):
    return float(values) if np.ndim(x) == 0 else values


@dataclass(frozen=True)
class ContinuousLossLaw:
    derived: DerivedParams
    T: float
    quad: QuadratureSpec = DEFAULT_QUADRATURE

    @classmethod
    def from_params(cls, params: ContractParams, quad: QuadratureSpec = DEFAULT_QUADRATURE):
        return cls(derive(params, NO_JUMPS), params.T, quad)

    @property
    def is_degenerate(self) -> bool:
        """True when the limit is the point mass at ``p``."""
        return self.derived.Lambda == 0.0

    @property
    def threshold(self) -> float:
        """``Xi / sqrt(T)``, algebraically ``Sigma * Phi^-1(p)`` without the round trip."""
        return self.derived.Xi / math.sqrt(self.T)

    def _require_spread(self):
        if self.is_degenerate:
            raise DegenerateModelError(
                "Lambda = 0: the limiting loss is the point mass at p (no density or percentile curve)"
            )

    def _require_zeta(self):
        if self.derived.zeta == 0.0:
            raise DegenerateModelError("zeta = 0: no idiosyncratic risk, conditional losses are 0 or 1")

    def conditional_score(self, y):
        """Normal score ``Phi^-1`` of the conditional default probability at ``Y_T = y``."""
        d = self.derived
        self._require_zeta()
        y = np.asarray(y, dtype=float)
        return _as_output(y, (self.threshold - d.Lambda * y / math.sqrt(self.T)) / d.zeta)

    def conditional_default_prob(self, y):
        """Default probability given the aggregate factor value ``Y_T = y``."""
        d = self.derived
        if d.Lambda == 0.0:
            return _as_output(y, np.full(np.shape(y), d.p))
        return _as_output(y, std_normal_cdf(self.conditional_score(y)))

    def _log_conditional(self, ystd):
        """(log p, log(1 - p)) at standardised factor values ``Y_T / sqrt(T)``."""
        d = self.derived
        self._require_zeta()
        h = (self.threshold - d.Lambda * ystd) / d.zeta
        return special.log_ndtr(h), special.log_ndtr(-h)

    def finite_pmf(self, n: int, k: int, quad: Optional[QuadratureSpec] = None) -> float:
        """Probability of exactly ``k`` defaults among ``n`` loans.

        The binomial integrand peaks where the conditional probability equals
        ``k / n`` with width of order ``1 / sqrt(n)``; beyond
        ``PMF_HERMITE_MAX_N`` loans the fixed Gauss-Hermite rule can miss
        that peak, so the adaptive rule is used with a breakpoint there.
        """
        if n < 1 or not 0 <= k <= n:
            raise DomainError(f"need n >= 1 and 0 <= k <= n, got n={n}, k={k}")
        spec = quad or self.quad
        d = self.derived
        log_binom = special.gammaln(n + 1.0) - special.gammaln(k + 1.0) - special.gammaln(n - k + 1.0)

        def integrand(y):
            lp, lq = self._log_conditional(y)
            return np.exp(log_binom + k * lp + (n - k) * lq)

        if d.Lambda == 0.0 or (n <= PMF_HERMITE_MAX_N and spec.scheme == "gauss-hermite"):
            return gauss_weighted_integral(integrand, spec)

        def weighted(y):
            lp, lq = self._log_conditional(y)
            return math.exp(log_binom + k * lp + (n - k) * lq - 0.5 * y * y) / SQRT_2PI

        points = ()
        if 0 < k < n:
            peak = (self.threshold - d.zeta * std_normal_quantile(k / n)) / d.Lambda
            points = (min(max(peak, -GAUSS_CUTOFF + 1.0), GAUSS_CUTOFF - 1.0),)
        adaptive = QuadratureSpec("adaptive", max(spec.order, 200), spec.tol)
        value, _ = adaptive_integral(weighted, -GAUSS_CUTOFF, GAUSS_CUTOFF, adaptive, points=points, rtol=1e-10)
        return value

    def finite_pmf_vector(self, n: int, quad: Optional[QuadratureSpec] = None) -> np.ndarray:
        """``finite_pmf(n, k)`` for every ``k = 0..n``."""
        return np.array([self.finite_pmf(n, k, quad) for k in range(n + 1)])

    def score_cdf(self, z):
        """P[Phi^-1(limiting loss) <= z]: the CDF in normal-score coordinates."""
        self._require_spread()
        d = self.derived
        z = np.asarray(z, dtype=float)
        return _as_output(z, std_normal_cdf((d.zeta * z - self.threshold) / abs(d.Lambda)))

    def limiting_cdf(self, x):
        """P[limiting loss <= x]; 0 below the unit interval and 1 above it."""
        self._require_spread()
        arr, inside, z = _unit_interval(x)
        out = np.where(arr >= 1.0, 1.0, 0.0)
        out[inside] = self.score_cdf(z[inside])
        return _as_output(x, out)

    def limiting_density(self, x):
        self._require_spread()
        d = self.derived
        arr, inside, z = _unit_interval(x)
        out = np.zeros_like(arr)
        zi = z[inside]
        H = (d.zeta * zi - self.threshold) / abs(d.Lambda)
        with np.errstate(over="ignore"):
            out[inside] = d.zeta / abs(d.Lambda) * np.exp(0.5 * (zi * zi - H * H))
        return _as_output(x, out)

    def score_density(self, z):
        """Density of ``Phi^-1(limiting loss)``: normal with mean threshold/zeta, sd |Lambda|/zeta."""
        self._require_spread()
        d = self.derived
        z = np.asarray(z, dtype=float)
        return _as_output(z, d.zeta / abs(d.Lambda) * std_normal_pdf((d.zeta * z - self.threshold) / abs(d.Lambda)))

    def classify_shape(self) -> Shape:
        """Unimodal (with its mode), monotone or bimodal, by the sign of Lambda^2 - zeta^2."""
        self._require_spread()
        d = self.derived
        gap = d.Lambda ** 2 - d.zeta ** 2
        if abs(gap) <= SHAPE_TOLERANCE:
            return Shape("monotone")
        if gap > 0:
            return Shape("bimodal")
        return Shape("unimodal", std_normal_cdf(d.zeta * self.threshold / -gap))

    def mean(self) -> float:
        """E[limiting loss]; every loan defaults with probability p."""
        return self.derived.p

    def variance(self) -> float:
        """Var[limiting loss] = E[p(Y)^2] - p^2, the default covariance of two loans."""
        if self.is_degenerate:
            return 0.0
        rt = math.sqrt(self.T)

        def square(y):
            return np.asarray(self.conditional_default_prob(rt * y)) ** 2

        return gauss_weighted_integral(square, self.quad) - self.derived.p ** 2

    def score_percentile(self, nu):
        """nu-quantile of ``Phi^-1(limiting loss)``."""
        self._require_spread()
        self._require_zeta()
        d = self.derived
        s = std_normal_quantile(nu)
        return _as_output(nu, (self.threshold + abs(d.Lambda) * np.asarray(s)) / d.zeta)

    def percentile(self, nu):
        """Closed-form nu-quantile of the limiting loss."""
        return _as_output(nu, std_normal_cdf(np.asarray(self.score_percentile(nu))))

    def expected_shortfall(self, nu: float, quad: Optional[QuadratureSpec] = None) -> float:
        """Average of the quantiles above ``nu``.

        Integrated in normal-score coordinates q = Phi(s), where the
        integrand is the smooth quantile function times a Gaussian weight.
        """
        self._require_spread()
        self._require_zeta()
        d = self.derived
        s_nu = std_normal_quantile(nu)
        a, b = self.threshold / d.zeta, abs(d.Lambda) / d.zeta

        def integrand(s):
            return std_normal_cdf(a + b * s) * std_normal_pdf(s)

        upper = max(GAUSS_CUTOFF, s_nu + 1.0)
        value, _ = adaptive_integral(integrand, s_nu, upper, quad or self.quad)
        return value / (1.0 - nu)


def loss_covariance(
    a: ContractParams,
    b: ContractParams,
    T: Optional[float] = None,
    quad: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Covariance of two loans' default indicators driven by one aggregate factor."""
    if T is None:
        if a.T != b.T:
            raise ValidationError("T", "contracts have different horizons; pass the joint horizon")
        T = a.T
    la = ContinuousLossLaw(derive(_with_horizon(a, T)), T, quad)
    lb = ContinuousLossLaw(derive(_with_horizon(b, T)), T, quad)
    rt = math.sqrt(T)

    def integrand(y):
        return np.asarray(la.conditional_default_prob(rt * y)) * np.asarray(lb.conditional_default_prob(rt * y))

    joint = gauss_weighted_integral(integrand, quad)
    return joint - la.derived.p * lb.derived.p


def _with_horizon(params: ContractParams, T: float) -> ContractParams:
    return params if params.T == T else replace(params, T=T)


def solve_monotone_rho(sigma: float, beta: float, theta: float, tol: float = 1e-15) -> float:
    """Asset correlation weight on the ``Lambda > 0`` branch where ``Lambda^2 = zeta^2``.

    On that branch ``Lambda^2 - zeta^2`` is increasing in rho, so bisection
    applies from ``rho = (beta sqrt(theta) / sigma)^2`` (where Lambda = 0) up to 1.
    """
    if sigma <= 0:
        raise DomainError("sigma must be > 0")
    lo = (beta * math.sqrt(theta) / sigma) ** 2
    if lo >= 1.0:
        raise DomainError("Lambda cannot be positive for these volatilities")

    def gap(rho):
        lam = sigma * math.sqrt(rho) - beta * math.sqrt(theta)
        zeta2 = sigma ** 2 * (1.0 - rho) + beta ** 2 * (1.0 - theta)
        return lam * lam - zeta2

    return find_root_increasing(gap, lo, 1.0, tol)
