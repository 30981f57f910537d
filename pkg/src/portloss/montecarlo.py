"""Monte Carlo oracle for the analytic loss laws.

Samples are generated in fixed-size blocks; block ``b`` draws from a Philox
generator whose counter starts at ``b << 192``, so every sample is a function
of ``(seed, sample index)`` only. Worker count changes scheduling, never values.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .continuous import ContinuousLossLaw
from .errors import DomainError
from .jump import JumpLossLaw
from .numerics import std_normal_cdf
from .model import NO_JUMPS, ConstantJumps, ContractParams, ExponentialJumps, JumpSpec, jump_mean_factor

BLOCK = 1 << 16
# inversion sampling of the Poisson count below this mean
POISSON_INVERSION_LIMIT = 10.0

Law = Union[ContinuousLossLaw, JumpLossLaw]


@dataclass(frozen=True)
class SimConfig:
    samples: int
    seed: int = 0
    workers: int = 1
    mode: str = "limiting"
    n: Optional[int] = None

    def __post_init__(self):
        if self.samples <= 0:
            raise DomainError("sample count must be > 0")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise DomainError("worker count must be >= 1")
        if self.mode not in ("limiting", "finite"):
            raise DomainError(f"unknown simulation mode {self.mode!r}")
        if self.mode == "finite" and (self.n is None or self.n < 1):
            raise DomainError("finite mode needs a portfolio size n >= 1")


def block_generator(seed: int, block: int) -> np.random.Generator:
    """Independent Philox stream for one block of samples."""
    counter = np.array([0, 0, 0, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def _blocks(total: int, size: int):
    return [(b, min(size, total - b * size)) for b in range(-(-total // size))]


def _run_blocks(fn, total: int, size: int, workers: int):
    plan = _blocks(total, size)
    if workers == 1 or len(plan) == 1:
        return [fn(b, m) for b, m in plan]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda bm: fn(*bm), plan))


def sample_poisson(rng: np.random.Generator, mean: float, size: int) -> np.ndarray:
    """Poisson counts; inversion of the cumulative pmf for small means."""
    if mean == 0.0:
        return np.zeros(size, dtype=np.int64)
    if mean >= POISSON_INVERSION_LIMIT:
        return rng.poisson(mean, size)
    u = rng.random(size)
    terms = [math.exp(-mean)]
    cdf = [terms[0]]
    while cdf[-1] < 1.0 and len(terms) < 1000:
        terms.append(terms[-1] * mean / len(terms))
        nxt = cdf[-1] + terms[-1]
        if nxt == cdf[-1]:
            break
        cdf.append(nxt)
    return np.searchsorted(np.array(cdf), u, side="right").astype(np.int64)


def sample_jump_sums(rng: np.random.Generator, jump: JumpSpec, T: float, size: int) -> np.ndarray:
    """Accumulated jump ``J_T``: a Poisson number of iid jump sizes, summed exactly."""
    if not jump.active:
        return np.zeros(size)
    counts = sample_poisson(rng, jump.lam * T, size)
    law = jump.size_law
    if isinstance(law, ConstantJumps):
        return counts * law.c
    if isinstance(law, ExponentialJumps):
        out = np.zeros(size)
        hit = counts > 0
        # sum of k iid Exp(gamma) is Gamma(k, scale 1/gamma)
        out[hit] = rng.gamma(counts[hit], 1.0 / law.gamma)
        return out
    raise DomainError(f"cannot sample jump law {law!r}")


@dataclass
class SimResult:
    """Sorted loss samples plus, for limiting-law draws, their normal scores.

    Scores ``Phi^-1(loss)`` keep resolution where losses round to 0 or 1.
    """

    samples: np.ndarray
    scores: Optional[np.ndarray] = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if self.scores is None:
            self.samples = np.sort(samples)
            return
        scores = np.asarray(self.scores, dtype=float)
        order = np.argsort(scores, kind="stable")
        self.scores = scores[order]
        # Phi is monotone, so this order also sorts the losses
        self.samples = np.maximum.accumulate(samples[order])

    @property
    def count(self) -> int:
        return self.samples.size

    def ecdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.count

    def mean(self) -> float:
        return float(self.samples.mean())

    def variance(self) -> float:
        if self.count < 2:
            return 0.0
        # centring on a sample keeps a constant sample at exactly zero
        return float((self.samples - self.samples[0]).var(ddof=1))

    def mean_se(self) -> float:
        return math.sqrt(self.variance() / self.count)

    def percentile(self, nu: float) -> float:
        return empirical_percentile(self, nu)

    def percentile_se(self, nu: float, z: float = 1.0) -> float:
        """Half-width of the order-statistic interval ``nu*N +- z*sqrt(N nu (1-nu))``, per unit z."""
        n = self.count
        spread = z * math.sqrt(n * nu * (1.0 - nu))
        lo = max(0, int(math.floor(nu * n - spread)) - 1)
        hi = min(n - 1, int(math.ceil(nu * n + spread)) - 1)
        return float(self.samples[hi] - self.samples[lo]) / (2.0 * z)

    def expected_shortfall(self, nu: float) -> float:
        """Mean of the upper ``1 - nu`` fraction of the samples."""
        return float(self.samples[_order_index(nu, self.count):].mean())

    def expected_shortfall_se(self, nu: float) -> float:
        tail = self.samples[_order_index(nu, self.count):]
        if tail.size < 2:
            return 0.0
        return float(tail.std(ddof=1) / math.sqrt(tail.size))

    def summary(self, nus=()) -> dict:
        out = {"mean": self.mean(), "variance": self.variance(), "mean_se": self.mean_se()}
        for nu in nus:
            out[f"percentile_{nu:g}"] = self.percentile(nu)
            out[f"percentile_se_{nu:g}"] = self.percentile_se(nu)
            out[f"es_{nu:g}"] = self.expected_shortfall(nu)
            out[f"es_se_{nu:g}"] = self.expected_shortfall_se(nu)
        return out


def _order_index(nu: float, n: int) -> int:
    """Zero-based index of the ceil(nu*n)-th order statistic."""
    if not 0.0 < nu < 1.0:
        raise DomainError("confidence level must lie in (0, 1)")
    # guard against nu*n landing a hair above an integer
    return min(n - 1, max(0, math.ceil(nu * n - 1e-9) - 1))


def empirical_percentile(result: SimResult, nu: float) -> float:
    """Lower order statistic at rank ``ceil(nu * N)``."""
    return float(result.samples[_order_index(nu, result.count)])


def sample_limiting_loss(law: Law, cfg: SimConfig) -> SimResult:
    """Draw the limiting loss as the conditional default probability at sampled factors."""
    T = law.T
    jump = getattr(law, "jump", NO_JUMPS)

    if isinstance(law, ContinuousLossLaw) and law.is_degenerate:
        # no factor dependence: the limit is the point mass at p
        return SimResult(np.full(cfg.samples, law.derived.p))

    def block(b, m):
        rng = block_generator(cfg.seed, b)
        y = math.sqrt(T) * rng.standard_normal(m)
        if isinstance(law, JumpLossLaw):
            j = sample_jump_sums(rng, jump, T, m)
            return np.asarray(law.conditional_score(y, j), dtype=float).reshape(m)
        return np.asarray(law.conditional_score(y), dtype=float).reshape(m)

    scores = np.concatenate(_run_blocks(block, cfg.samples, BLOCK, cfg.workers))
    return SimResult(std_normal_cdf(scores), scores)


def _log_ratio_drift(params: ContractParams, jump: JumpSpec) -> float:
    compensator = jump.lam * jump_mean_factor(jump)
    return (
        math.log(params.A0 / params.B0)
        + (params.mu + compensator - 0.5 * params.sigma ** 2 - params.alpha + 0.5 * params.beta ** 2) * params.T
    )


def sample_default_indicators(
    params: ContractParams, jump: JumpSpec, n: int, cfg: SimConfig
) -> np.ndarray:
    """Boolean ``(samples, n)`` default matrix from exact terminal values.

    Each replication shares ``Y_T`` and ``J_T`` across loans; every loan has its
    own asset and liability idiosyncratic factors.
    """
    if n < 1:
        raise DomainError("portfolio size must be >= 1")
    s, b = params.sigma, params.beta
    rt = math.sqrt(params.T)
    drift = _log_ratio_drift(params, jump)
    load_y = s * math.sqrt(params.rho) - b * math.sqrt(params.theta)
    load_x = s * math.sqrt(1.0 - params.rho)
    load_z = b * math.sqrt(1.0 - params.theta)
    rows = max(1, (1 << 20) // n)

    def block(bidx, m):
        rng = block_generator(cfg.seed, bidx)
        y = rt * rng.standard_normal(m)
        j = sample_jump_sums(rng, jump, params.T, m)
        x = rt * rng.standard_normal((m, n))
        z = rt * rng.standard_normal((m, n))
        log_ratio = drift + (load_y * y - j)[:, None] + load_x * x - load_z * z
        return log_ratio <= 0.0

    return np.concatenate(_run_blocks(block, cfg.samples, rows, cfg.workers))


def sample_finite_portfolio(
    params: ContractParams, jump: JumpSpec, n: int, cfg: SimConfig
) -> SimResult:
    """Default fraction of an ``n``-loan portfolio per replication."""
    defaults = sample_default_indicators(params, jump, n, cfg)
    return SimResult(defaults.mean(axis=1))


def sample_terminal_assets(params: ContractParams, jump: JumpSpec, cfg: SimConfig, t: Optional[float] = None):
    """Terminal asset values under the compensated jump dynamics (unsorted)."""
    t = params.T if t is None else t
    comp = jump.lam * jump_mean_factor(jump)
    rt = math.sqrt(t)

    def block(b, m):
        rng = block_generator(cfg.seed, b)
        w = rt * rng.standard_normal(m)
        j = sample_jump_sums(rng, jump, t, m)
        return params.A0 * np.exp((params.mu + comp - 0.5 * params.sigma ** 2) * t + params.sigma * w - j)

    return np.concatenate(_run_blocks(block, cfg.samples, BLOCK, cfg.workers))


def ks_distance(result: SimResult, cdf, max_evals: Optional[int] = None, on_scores: bool = False) -> float:
    """Kolmogorov-Smirnov distance between the sample ECDF and ``cdf``.

    With ``max_evals`` the analytic CDF is evaluated only at that many evenly
    spaced order statistics and the monotonicity of both functions gives a
    rigorous upper bound on the distance; without it the distance is exact
    (for a continuous ``cdf``). With ``on_scores`` the comparison runs on the
    normal scores and ``cdf`` must be a score-space CDF such as
    ``law.score_cdf``; the distance is the same, without rounding at 0 and 1.
    """
    if on_scores and result.scores is None:
        raise DomainError("result carries no normal scores")
    xs = result.scores if on_scores else result.samples
    n = xs.size
    if max_evals is None or max_evals >= n:
        values = np.unique(xs)
        right = np.searchsorted(xs, values, side="right") / n
        left = np.searchsorted(xs, values, side="left") / n
        f = np.asarray(cdf(values), dtype=float)
        return float(max(np.max(np.abs(right - f)), np.max(np.abs(f - left))))
    idx = np.unique(np.linspace(0, n - 1, max_evals).round().astype(np.int64))
    f = np.asarray(cdf(xs[idx]), dtype=float)
    # ECDF just below and at each chosen order statistic (ties handled)
    below = np.searchsorted(xs, xs[idx], side="left") / n
    at = np.searchsorted(xs, xs[idx], side="right") / n
    bound = max(np.max(np.abs(at - f)), np.max(np.abs(f - below)), f[0], 1.0 - f[-1])
    # between consecutive evaluation points x_i < x_j:
    # ECDF in [at_i, below_j], analytic CDF in [f_i, f_j]
    gaps = np.maximum(below[1:] - f[:-1], f[1:] - at[:-1])
    return float(max(bound, np.max(gaps)))


def ks_distance_discrete(result: SimResult, support, cdf_values) -> float:
    """KS distance to a purely atomic law with atoms ``support`` and CDF values ``cdf_values`` there.

    Both step functions are right-continuous and flat between jumps, so the
    supremum is attained on the union of sample values and atoms.
    """
    support = np.asarray(support, dtype=float)
    cdf_values = np.asarray(cdf_values, dtype=float)
    order = np.argsort(support)
    support, cdf_values = support[order], cdf_values[order]
    points = np.union1d(np.unique(result.samples), support)
    ecdf = result.ecdf(points)
    k = np.searchsorted(support, points, side="right") - 1
    law = np.where(k < 0, 0.0, cdf_values[np.clip(k, 0, None)])
    return float(np.max(np.abs(ecdf - law)))
