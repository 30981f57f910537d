"""Shared fixtures and oracles for the test suite."""

import numpy as np
from scipy import integrate, special

from portloss import ContractParams, JumpSpec

EPS = 1e-6

# unimodal no-jump setting used by the percentile tables (alpha corrected to 0.05)
FIG4 = dict(mu=0.055, alpha=0.05, sigma=0.2, beta=0.1, rho=0.7, theta=0.7, A0=1.1, B0=1.0, T=1.0)


def params(**overrides) -> ContractParams:
    return ContractParams(**{**FIG4, **overrides})


def exponential(lam=0.02, gamma=1.0) -> JumpSpec:
    return JumpSpec.exponential(lam, gamma)


def grid(n=10_000):
    return np.linspace(EPS, 1.0 - EPS, n)


def count_modes(density):
    """Grid local maxima of a sampled density.

    Returns ``(total, interior)``; an endpoint counts as a mode when the
    density rises towards it.
    """
    d = np.asarray(density, dtype=float)
    i = np.arange(1, d.size - 1)
    interior = int(np.sum((d[i] > d[i - 1]) & (d[i] >= d[i + 1])))
    boundary = int(d[0] > d[1]) + int(d[-1] > d[-2])
    return interior + boundary, interior


def integrate_density(law, lo=-8.0, hi=8.0, n=8001):
    """Integral of the density over ``Phi(lo) < x < Phi(hi)`` in normal-score coordinates.

    Substituting x = Phi(s) removes the endpoint singularities of U-shaped laws.
    """
    s = np.linspace(lo, hi, n)
    x = special.ndtr(s)
    f = np.asarray(law.limiting_density(x)) * np.exp(-0.5 * s * s) / np.sqrt(2.0 * np.pi)
    return float(integrate.simpson(f, x=s))


def score_integral(law, weight=None):
    """Integral of ``weight(s)`` against the score density over the whole line.

    ``weight`` defaults to 1 (total mass). Split at +-40 with a breakpoint at
    the median so the bulk is never stepped over.
    """
    weight = weight or (lambda s: 1.0)
    centre = law.score_percentile(0.5)

    def f(s):
        return weight(s) * law.score_density(s)

    inner = integrate.quad(f, -40.0, 40.0, points=[centre], limit=500, epsabs=1e-13)[0]
    outer = integrate.quad(f, 40.0, np.inf, limit=500, epsabs=1e-13)[0]
    return inner + outer
