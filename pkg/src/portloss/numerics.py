"""Numerical kernels: normal distribution, quadrature, root finding, series truncation.

Everything here is a pure function of its arguments. Scalar and array inputs
are both accepted by the normal-distribution helpers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import BracketError, DomainError, QuadratureError

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Saturation bounds applied before inverting the normal CDF.
PROB_FLOOR = 1e-300
PROB_CEIL = 1.0 - 1e-16

QUADRATURE_SCHEMES = ("gauss-hermite", "adaptive")


@dataclass(frozen=True)
class QuadratureSpec:
    """How to evaluate an integral.

    ``order`` is the Gauss-Hermite node count for the Gaussian-weighted scheme
    and the subinterval limit for the adaptive rule.
    """

    scheme: str = "gauss-hermite"
    order: int = 64
    tol: float = 1e-10

    def __post_init__(self):
        if self.scheme not in QUADRATURE_SCHEMES:
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}")
        if self.order < 2:
            raise DomainError("quadrature order must be >= 2")
        if not self.tol > 0:
            raise DomainError("quadrature tolerance must be > 0")


@dataclass(frozen=True)
class SeriesSpec:
    tail_bound: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.tail_bound < 1.0:
            raise DomainError("series tail bound must lie in (0, 1)")


DEFAULT_QUADRATURE = QuadratureSpec()
DEFAULT_SERIES = SeriesSpec()


def std_normal_pdf(z):
    if np.ndim(z) == 0:
        return INV_SQRT_2PI * math.exp(-0.5 * float(z) * float(z))
    z = np.asarray(z, dtype=float)
    return INV_SQRT_2PI * np.exp(-0.5 * z * z)


def std_normal_cdf(z):
    """Standard normal CDF via the complementary error function.

    Saturates to exactly 0 or 1 far in the tails; NaN propagates.
    """
    if np.ndim(z) == 0:
        return 0.5 * math.erfc(-float(z) / SQRT2)
    return special.ndtr(np.asarray(z, dtype=float))


def _check_open_unit(p):
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError("probability must lie strictly inside (0, 1)")
    return arr


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on (0, 1).

    Starts from scipy's ``ndtri`` and applies one Newton step against
    :func:`std_normal_cdf` on whichever tail is smaller, so the pair round-trips
    to working precision. Raises :class:`DomainError` outside (0, 1).
    """
    arr = _check_open_unit(p)
    upper = arr > 0.5
    # 1 - p is exact for p in [0.5, 1)
    tail = np.where(upper, 1.0 - arr, arr)
    z = special.ndtri(tail)
    resid = special.ndtr(z) - tail
    dens = INV_SQRT_2PI * np.exp(-0.5 * z * z)
    step = np.divide(resid, dens, out=np.zeros_like(z), where=dens > 0)
    z = z - step
    z = np.where(upper, -z, z)
    if np.ndim(p) == 0:
        return float(z)
    return z


def clamp_probability(p):
    """Saturate probabilities into ``[PROB_FLOOR, PROB_CEIL]`` before inversion."""
    if np.ndim(p) == 0:
        return min(max(float(p), PROB_FLOOR), PROB_CEIL)
    return np.clip(np.asarray(p, dtype=float), PROB_FLOOR, PROB_CEIL)


@lru_cache(maxsize=32)
def _hermite_rule(order):
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / math.sqrt(2.0 * math.pi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_hermite(f: Callable, order: int) -> float:
    """Fixed-order rule for the integral of ``f(y) * phi(y)`` over the real line.

    ``f`` must accept a numpy array of nodes.
    """
    nodes, weights = _hermite_rule(order)
    return float(np.dot(weights, f(nodes)))


def gauss_weighted_integral(f: Callable, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Integral of ``f(y) * phi(y)`` over the real line.

    With the Gauss-Hermite scheme the rule of order ``spec.order`` is compared
    against the doubled order; if they disagree by more than ``spec.tol`` the
    adaptive rule takes over. ``f`` must be vectorised.
    """
    if spec.scheme == "gauss-hermite":
        coarse = gauss_hermite(f, spec.order)
        fine = gauss_hermite(f, 2 * spec.order)
        if abs(fine - coarse) <= spec.tol:
            return fine

    def integrand(y):
        return float(f(np.array([y]))[0]) * std_normal_pdf(y)

    # the Gaussian weight is below 1e-300 beyond |y| = 37.5
    value, _ = adaptive_integral(integrand, -38.0, 38.0, spec, points=(0.0,))
    return value


def adaptive_integral(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    points=None,
    rtol: float = 0.0,
) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod integral of scalar ``f`` over ``[a, b]``.

    Returns ``(value, error_estimate)``. Raises :class:`QuadratureError` when
    the error estimate ends above both ``spec.tol`` and ``rtol * |value|``.
    """
    limit = max(spec.order, 50)
    if points is not None and np.isfinite(a) and np.isfinite(b):
        points = [x for x in points if a < x < b] or None
    else:
        points = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(
            f, a, b, epsabs=spec.tol, epsrel=rtol, limit=limit, points=points, full_output=1
        )[:2]
    if not math.isfinite(value) or err > max(spec.tol, rtol * abs(value)):
        raise QuadratureError(
            f"adaptive quadrature on [{a}, {b}] stopped at error {err:.3g} > {spec.tol:.3g}"
        )
    return value, err


def find_root_increasing(
    g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200
) -> float:
    """Bisection for a nondecreasing ``g`` with ``g(lo) <= 0 <= g(hi)``.

    Deterministic: the sequence of evaluation points depends only on the
    bracket and the signs observed.
    """
    if not lo <= hi:
        raise BracketError(f"empty bracket [{lo}, {hi}]")
    glo = g(lo)
    if glo == 0.0:
        return lo
    ghi = g(hi)
    if ghi == 0.0:
        return hi
    if not (glo < 0.0 < ghi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: g(lo)={glo!r}, g(hi)={ghi!r}")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if gm < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def poisson_weights(lambdaT: float, kmax: int) -> np.ndarray:
    """``exp(-lambdaT) lambdaT**k / k!`` for ``k = 0..kmax``."""
    k = np.arange(kmax + 1, dtype=float)
    if lambdaT == 0.0:
        out = np.zeros(kmax + 1)
        out[0] = 1.0
        return out
    return np.exp(-lambdaT + k * math.log(lambdaT) - special.gammaln(k + 1.0))


def poisson_truncation(lambdaT: float, spec: SeriesSpec = DEFAULT_SERIES) -> int:
    """Smallest K whose Poisson tail beyond K falls below ``spec.tail_bound``.

    The tail is summed explicitly from the far end, not formed as ``1 - cdf``,
    so bounds near machine epsilon stay meaningful.
    """
    if lambdaT < 0 or not math.isfinite(lambdaT):
        raise DomainError("lambdaT must be finite and >= 0")
    if lambdaT == 0.0:
        return 0
    # terms past this point are below 1e-300 relative to the bound
    kmax = int(lambdaT + 40.0 * math.sqrt(lambdaT) + 60)
    terms = poisson_weights(lambdaT, kmax)
    # tails[K] = sum_{k > K} terms[k]
    tails = np.concatenate((np.cumsum(terms[::-1])[::-1][1:], [0.0]))
    return int(np.argmax(tails < spec.tail_bound))
