"""Limiting loss law when every asset is also hit by systemic downward jumps.

Conditional on the aggregate diffusion factor ``Y_T`` and the accumulated jump
``J_T``, loans default independently with probability

    Phi((Sigma / zeta) (Phi^-1(pTilde) - Lambda Y_T / (Sigma sqrt T) + J_T / (Sigma sqrt T)))

so the limiting loss is a Poisson mixture over the number of jumps ``k`` of
laws shifted by the k-fold jump sum ``S_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import special

from .continuous import GAUSS_CUTOFF, _as_output, _unit_interval
from .errors import BracketError, DegenerateModelError, DomainError, UnsupportedLawError
from .model import ConstantJumps, ContractParams, DerivedParams, ExponentialJumps, JumpSpec, derive
from .numerics import (
    DEFAULT_QUADRATURE,
    DEFAULT_SERIES,
    QuadratureSpec,
    SeriesSpec,
    adaptive_integral,
    find_root_increasing,
    poisson_truncation,
    poisson_weights,
    std_normal_cdf,
    std_normal_quantile,
)

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# no loss score bracket beyond this (the jump sum would have to exceed ~1e4 zeta)
SCORE_LIMIT = 1e4
# Phi(-9) ~ 1e-19: outside +-9 / b of the transition the normal factor is flat
_WINDOW = 9.0
_GAMMA_TAIL = 1e-14
# absolute / relative tolerances of the per-component inner integrals
_INNER = QuadratureSpec("adaptive", 200, 1e-14)
_INNER_RTOL = 1e-11


@dataclass(frozen=True)
class Atom:
    """Point mass of the k-fold jump sum (constant jump sizes)."""

    location: float
    mass: float = 1.0


def convolution_density(jump: JumpSpec, k: int) -> Union[Callable, Atom]:
    """Law of the sum of ``k`` jump sizes: a Gamma density or an atom."""
    if k < 1:
        raise DomainError("k must be >= 1")
    law = jump.size_law
    if isinstance(law, ExponentialJumps):
        g = law.gamma

        def density(u):
            u = np.asarray(u, dtype=float)
            out = np.zeros_like(u)
            pos = u > 0
            up = u[pos]
            out[pos] = np.exp(math.log(g) + (k - 1) * np.log(g * up) - g * up - special.gammaln(k))
            if k == 1:
                out[u == 0] = g
            return float(out) if out.ndim == 0 else out

        return density
    if isinstance(law, ConstantJumps):
        return Atom(k * law.c)
    raise UnsupportedLawError(f"no k-fold convolution for jump law {law!r}")


def _gamma_logpdf(u, k, g):
    return math.log(g) + (k - 1) * math.log(g * u) - g * u - math.lgamma(k)


def _gamma_support(k, g):
    """Interval carrying all but ``_GAMMA_TAIL`` of the Gamma(k, rate g) mass."""
    lo = special.gammaincinv(k, _GAMMA_TAIL) / g if k > 1 else 0.0
    hi = special.gammainccinv(k, _GAMMA_TAIL) / g
    return lo, hi


def _smoothed_cdf(a, b, k, g):
    """E[Phi(a - b S)] for S ~ Gamma(k, rate g)."""
    lo, hi = _gamma_support(k, g)
    centre = a / b
    # where Phi(a - b u) is numerically 1 the integral is the Gamma CDF
    w_lo = max(lo, centre - _WINDOW / b)
    w_hi = min(hi, centre + _WINDOW / b)
    base = special.gammainc(k, g * w_lo) if w_lo > 0 else 0.0
    if w_hi <= w_lo:
        return base

    def f(u):
        if u <= 0.0:
            return g * std_normal_cdf(a) if k == 1 else 0.0
        return std_normal_cdf(a - b * u) * math.exp(_gamma_logpdf(u, k, g))

    pts = (centre, (k - 1) / g)
    value, _ = adaptive_integral(f, w_lo, w_hi, _INNER, points=pts, rtol=_INNER_RTOL)
    return base + value


def _smoothed_ratio(a, b, shift, k, g):
    """E[exp(shift - (a - b S)^2/2)] for S ~ Gamma(k, rate g)."""
    lo, hi = _gamma_support(k, g)
    centre = a / b
    w_lo = max(lo, centre - _WINDOW / b)
    w_hi = min(hi, centre + _WINDOW / b)
    if w_hi <= w_lo:
        return 0.0

    def f(u):
        h = a - b * u
        if u <= 0.0:
            return g * math.exp(shift - 0.5 * h * h) if k == 1 else 0.0
        return math.exp(shift - 0.5 * h * h + _gamma_logpdf(u, k, g))

    pts = (centre, (k - 1) / g)
    value, _ = adaptive_integral(f, w_lo, w_hi, _INNER, points=pts, rtol=_INNER_RTOL)
    return value


@dataclass(frozen=True)
class JumpLossLaw:
    derived: DerivedParams
    jump: JumpSpec
    T: float
    series: SeriesSpec = DEFAULT_SERIES
    quad: QuadratureSpec = DEFAULT_QUADRATURE

    @classmethod
    def from_params(
        cls,
        params: ContractParams,
        jump: JumpSpec,
        series: SeriesSpec = DEFAULT_SERIES,
        quad: QuadratureSpec = DEFAULT_QUADRATURE,
    ):
        return cls(derive(params, jump), jump, params.T, series, quad)

    @property
    def is_degenerate(self) -> bool:
        """True when the diffusion factor drops out (atomic mixture, CDF only)."""
        return self.derived.Lambda == 0.0

    @property
    def threshold(self) -> float:
        """``XiTilde / sqrt(T)``, algebraically ``Sigma * Phi^-1(pTilde)``."""
        return self.derived.XiTilde / math.sqrt(self.T)

    @property
    def lambda_t(self) -> float:
        return self.jump.lam * self.T if self.jump.size_law is not None else 0.0

    def truncation(self) -> int:
        return poisson_truncation(self.lambda_t, self.series)

    def mixture_weights(self) -> np.ndarray:
        """Poisson weights of 0..K jumps; they sum to 1 up to the series tail bound."""
        return poisson_weights(self.lambda_t, self.truncation())

    def conditional_score(self, y, j=0.0):
        """Normal score of the conditional default probability given ``Y_T = y``, ``J_T = j``."""
        d = self.derived
        if d.zeta == 0.0:
            raise DegenerateModelError("zeta = 0: no idiosyncratic risk, conditional losses are 0 or 1")
        j = np.asarray(j, dtype=float)
        if np.any(j < 0):
            raise DomainError("accumulated jump must be >= 0")
        rt = math.sqrt(self.T)
        y_arr = np.asarray(y, dtype=float)
        h = (self.threshold - d.Lambda * y_arr / rt + j / rt) / d.zeta
        return float(h) if np.ndim(h) == 0 else h

    def conditional_default_prob(self, y, j=0.0):
        """Default probability given ``Y_T = y`` and accumulated jump ``J_T = j``."""
        out = std_normal_cdf(self.conditional_score(y, j))
        return float(out) if np.ndim(out) == 0 else out

    # -- distribution -------------------------------------------------------

    def _cdf_interior(self, z: float) -> float:
        d = self.derived
        w = self.mixture_weights()
        lam = abs(d.Lambda)
        rt = math.sqrt(self.T)
        a = (d.zeta * z - self.threshold) / lam
        total = w[0] * std_normal_cdf(a)
        if len(w) == 1:
            return total
        law = self.jump.size_law
        b = 1.0 / (lam * rt)
        for k in range(1, len(w)):
            if isinstance(law, ConstantJumps):
                total += w[k] * std_normal_cdf(a - b * k * law.c)
            elif isinstance(law, ExponentialJumps):
                total += w[k] * _smoothed_cdf(a, b, k, law.gamma)
            else:
                raise UnsupportedLawError(f"jump law {law!r}")
        return total

    def _cdf_atomic(self, z: float) -> float:
        # Lambda = 0: loss = Phi((XiTilde + S_k) / (Sigma sqrt T)), so
        # {loss <= x} = {S_k <= Sigma sqrt(T) Phi^-1(x) - XiTilde}
        d = self.derived
        w = self.mixture_weights()
        m = d.Sigma * math.sqrt(self.T) * z - d.XiTilde
        if m < 0:
            return 0.0
        total = w[0]
        law = self.jump.size_law
        for k in range(1, len(w)):
            if isinstance(law, ConstantJumps):
                total += w[k] * (1.0 if k * law.c <= m else 0.0)
            elif isinstance(law, ExponentialJumps):
                total += w[k] * special.gammainc(k, law.gamma * m)
            else:
                raise UnsupportedLawError(f"jump law {law!r}")
        return total

    def score_cdf(self, z):
        """P[Phi^-1(limiting loss) <= z]: the CDF in normal-score coordinates."""
        kernel = self._cdf_atomic if self.is_degenerate else self._cdf_interior
        z = np.asarray(z, dtype=float)
        out = np.array([min(kernel(float(v)), 1.0) for v in z.reshape(-1)]).reshape(z.shape)
        return _as_output(z, out)

    def limiting_cdf(self, x):
        """P[limiting loss <= x]."""
        arr, inside, z = _unit_interval(x)
        out = np.where(arr >= 1.0, 1.0, 0.0)
        if np.any(inside):
            out[inside] = self.score_cdf(z[inside])
        return _as_output(x, out)

    def _density_interior(self, z: float, shift: float) -> float:
        """(zeta/|Lambda|) sum_k w_k E[exp(shift - H_k^2/2)] at normal score ``z``."""
        d = self.derived
        w = self.mixture_weights()
        lam = abs(d.Lambda)
        rt = math.sqrt(self.T)
        a = (d.zeta * z - self.threshold) / lam
        total = w[0] * math.exp(shift - 0.5 * a * a)
        law = self.jump.size_law
        b = 1.0 / (lam * rt)
        for k in range(1, len(w)):
            if isinstance(law, ConstantJumps):
                h = a - b * k * law.c
                total += w[k] * math.exp(shift - 0.5 * h * h)
            elif isinstance(law, ExponentialJumps):
                total += w[k] * _smoothed_ratio(a, b, shift, k, law.gamma)
            else:
                raise UnsupportedLawError(f"jump law {law!r}")
        return d.zeta / lam * total

    def _require_spread(self):
        if self.is_degenerate:
            raise DegenerateModelError("Lambda = 0: the jump mixture is atomic and has no density")

    def limiting_density(self, x):
        self._require_spread()
        arr, inside, z = _unit_interval(x)
        out = np.zeros_like(arr)
        flat_z = z.reshape(-1)
        flat_out = out.reshape(-1)
        for i in np.flatnonzero(inside):
            zi = float(flat_z[i])
            try:
                flat_out[i] = self._density_interior(zi, 0.5 * zi * zi)
            except OverflowError:
                flat_out[i] = math.inf
        return _as_output(x, out)

    def score_density(self, z):
        """Density of ``Phi^-1(limiting loss)``.

        Unlike the density in ``x`` it stays resolvable where jumps push the
        loss within rounding distance of 1.
        """
        self._require_spread()
        z = np.asarray(z, dtype=float)
        out = np.array([self._density_interior(float(v), -LOG_SQRT_2PI) for v in z.reshape(-1)]).reshape(z.shape)
        return _as_output(z, out)

    def _survival_moment(self, power: int) -> float:
        """E[L^power] = int_0^1 power x^(power-1) (1 - F(x)) dx, in normal-score coordinates."""
        kernel = self._cdf_atomic if self.is_degenerate else self._cdf_interior

        def integrand(s):
            x = std_normal_cdf(s)
            weight = power * x ** (power - 1)
            return weight * max(0.0, 1.0 - kernel(s)) * math.exp(-0.5 * s * s) / math.sqrt(2.0 * math.pi)

        pts = (std_normal_quantile(self.derived.pTilde),)
        value, _ = adaptive_integral(integrand, -GAUSS_CUTOFF, GAUSS_CUTOFF, self.quad, points=pts)
        return value

    def mean(self) -> float:
        return self._survival_moment(1)

    def variance(self) -> float:
        m = self.mean()
        return self._survival_moment(2) - m * m

    def score_percentile(self, nu: float, tol: float = 1e-12) -> float:
        """nu-quantile of ``Phi^-1(limiting loss)`` by bisection on the score CDF.

        Working in scores keeps quantiles distinct where jumps carry the loss
        within rounding distance of 1; the upper bracket grows until it
        covers ``nu``.
        """
        if not 0.0 < nu < 1.0:
            raise DomainError("confidence level must lie in (0, 1)")
        kernel = self._cdf_atomic if self.is_degenerate else self._cdf_interior
        lo, hi = -GAUSS_CUTOFF, GAUSS_CUTOFF
        while kernel(hi) < nu:
            if hi > SCORE_LIMIT:
                raise BracketError(f"confidence level {nu} lies beyond the truncated mixture mass")
            lo, hi = hi, 2.0 * hi
        return find_root_increasing(lambda z: kernel(z) - nu, lo, hi, tol)

    def percentile(self, nu, tol: float = 1e-12):
        """nu-quantile of the limiting loss (score bisection mapped through Phi)."""
        if np.ndim(nu) != 0:
            return np.array([self.percentile(float(v), tol) for v in np.ravel(nu)]).reshape(np.shape(nu))
        return std_normal_cdf(self.score_percentile(nu, tol))

    def expected_shortfall(self, nu: float, quad: Optional[QuadratureSpec] = None) -> float:
        """Average of the quantiles above ``nu``.

        Uses ``int_nu^1 q(t) dt = (1 - nu) q(nu) + int_{q(nu)}^1 (1 - F(x)) dx``,
        which holds for atoms as well, with the survival integral taken in
        normal-score coordinates ``x = Phi(s)``.
        """
        spec = quad or self.quad
        s_lo = self.score_percentile(nu)
        var = std_normal_cdf(s_lo)
        kernel = self._cdf_atomic if self.is_degenerate else self._cdf_interior

        def survival(s):
            return max(0.0, 1.0 - kernel(s)) * math.exp(-0.5 * s * s) / math.sqrt(2.0 * math.pi)

        upper = max(GAUSS_CUTOFF, s_lo + 1.0)
        value, _ = adaptive_integral(survival, s_lo, upper, spec)
        return var + value / (1.0 - nu)
