import math

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import exponential, params
from portloss import ConstantJumps, ContractParams, ExponentialJumps, JumpSpec, asset_moments, derive
from portloss.errors import DegenerateModelError, ValidationError
from portloss.model import NO_JUMPS, jump_mean_factor


def test_reference_aggregates():
    d = derive(params())
    assert d.Sigma == pytest.approx(0.148324, abs=1e-6)
    assert d.zeta == pytest.approx(0.122474, abs=1e-6)
    assert d.Lambda == pytest.approx(0.083666, abs=1e-6)
    assert d.Xi == pytest.approx(-0.085310, abs=1e-6)
    assert d.p == pytest.approx(0.5 * math.erfc(0.085310 / 0.148324 / math.sqrt(2)), abs=1e-6)
    assert d.p == pytest.approx(0.2825, abs=1e-4)
    assert (d.XiTilde, d.pTilde) == (d.Xi, d.p)


def test_equal_loadings_cancel():
    d = derive(params(sigma=0.15, beta=0.15, rho=0.4, theta=0.4))
    assert d.Lambda == 0.0


def test_classical_reduction_without_liability_noise():
    d = derive(params(beta=0.0, rho=0.3))
    assert d.Sigma == pytest.approx(0.2, abs=1e-15)
    assert d.zeta == pytest.approx(0.2 * math.sqrt(0.7), abs=1e-15)
    assert d.Lambda == pytest.approx(0.2 * math.sqrt(0.3), abs=1e-15)


def test_deterministic_ratio_is_rejected():
    with pytest.raises(DegenerateModelError):
        derive(params(sigma=0.2, beta=0.2, rho=1.0, theta=1.0))


@pytest.mark.parametrize(
    "field, value",
    [("rho", 1.5), ("theta", -0.1), ("sigma", -0.2), ("beta", -1.0), ("A0", 0.0), ("B0", -1.0), ("T", 0.0), ("mu", float("nan"))],
)
def test_invalid_contract_names_field(field, value):
    with pytest.raises(ValidationError) as exc:
        params(**{field: value})
    assert exc.value.field == field


def test_jump_spec_validation():
    with pytest.raises(ValidationError):
        JumpSpec.exponential(-0.1, 1.0)
    with pytest.raises(ValidationError):
        JumpSpec.exponential(0.1, 0.0)
    with pytest.raises(ValidationError):
        JumpSpec.constant(0.1, -1.0)
    assert not JumpSpec.exponential(0.0, 1.0).active
    assert JumpSpec.constant(0.5, 0.1).active


def test_jump_mean_factor():
    assert jump_mean_factor(NO_JUMPS) == 0.0
    assert jump_mean_factor(exponential(0.02, 1.0)) == pytest.approx(0.5)
    assert jump_mean_factor(exponential(0.02, 1e6)) == pytest.approx(1e-6, rel=1e-5)
    assert jump_mean_factor(exponential(0.02, 1e9)) == 0.0
    assert jump_mean_factor(JumpSpec.constant(1.0, math.log(2))) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("gamma", [0.2, 1.0, 7.0])
def test_exponential_moment_factors(gamma):
    law = ExponentialJumps(gamma)
    assert law.laplace() == pytest.approx(gamma / (gamma + 1))
    assert law.second_factor() == pytest.approx(1 - 2 * gamma / (gamma + 1) + gamma / (gamma + 2), abs=1e-15)


def test_constant_moment_factors():
    law = ConstantJumps(0.3)
    assert law.second_factor() == pytest.approx((1 - math.exp(-0.3)) ** 2, abs=1e-16)


def test_zero_intensity_matches_no_jumps():
    assert derive(params(), exponential(0.0, 1.0)) == derive(params(), NO_JUMPS)


aggregate = st.fixed_dictionaries(
    dict(
        sigma=st.floats(0.01, 1.0),
        beta=st.floats(0.0, 1.0),
        rho=st.floats(0.0, 1.0),
        theta=st.floats(0.0, 1.0),
        mu=st.floats(-0.2, 0.2),
        alpha=st.floats(-0.2, 0.2),
        A0=st.floats(0.2, 5.0),
        B0=st.floats(0.2, 5.0),
        T=st.floats(0.1, 10.0),
    )
)


@settings(max_examples=300, deadline=None)
@given(aggregate)
def test_aggregate_identities(kw):
    p = ContractParams(**kw)
    try:
        d = derive(p)
    except DegenerateModelError:
        return
    s, b, r, t = kw["sigma"], kw["beta"], kw["rho"], kw["theta"]
    assert d.Sigma**2 == pytest.approx(s * s + b * b - 2 * s * b * math.sqrt(r * t), abs=1e-12)
    assert d.zeta**2 == pytest.approx(s * s * (1 - r) + b * b * (1 - t), abs=1e-12)
    assert d.Lambda == s * math.sqrt(r) - b * math.sqrt(t)
    assert d.Sigma**2 == pytest.approx(d.zeta**2 + d.Lambda**2, abs=1e-12)
    assert 0.0 <= d.p <= 1.0


@settings(max_examples=200, deadline=None)
@given(aggregate, st.floats(0.1, 10.0))
def test_scale_free_in_initial_values(kw, scale):
    try:
        a = derive(ContractParams(**kw))
    except DegenerateModelError:
        return
    b = derive(ContractParams(**{**kw, "A0": kw["A0"] * scale, "B0": kw["B0"] * scale}))
    for name in ("Sigma", "zeta", "Lambda", "Xi", "p", "XiTilde", "pTilde"):
        assert getattr(b, name) == pytest.approx(getattr(a, name), rel=1e-12, abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 2.0), st.floats(0.5, 2.0), st.floats(1.01, 1.5))
def test_default_probability_monotone_in_cover(a0, b0, bump):
    base = derive(params(A0=a0, B0=b0)).p
    assert derive(params(A0=a0 * bump, B0=b0)).p <= base
    assert derive(params(A0=a0, B0=b0 * bump)).p >= base


def test_compensation_direction_symbolic():
    # XiTilde = Xi - lam * m * T with m = 1 - E[exp(-xi)] > 0
    Xi = sp.symbols("Xi", real=True)
    lam, m, T, Sigma = sp.symbols("lam m T Sigma", positive=True)
    z = (Xi - lam * m * T) / (Sigma * sp.sqrt(T))
    ptilde = (1 + sp.erf(z / sp.sqrt(2))) / 2
    density = sp.exp(-z**2 / 2) / sp.sqrt(2 * sp.pi)
    # d pTilde / d lam = -(m sqrt(T) / Sigma) phi(z): strictly negative
    ratio = sp.simplify(sp.diff(ptilde, lam) / density)
    assert sp.simplify(ratio + m * sp.sqrt(T) / Sigma) == 0
    assert (-ratio).is_positive


@pytest.mark.parametrize("jump", [exponential(0.02, 1.0), exponential(1.0, 0.2), JumpSpec.constant(1.5, 0.8)])
def test_compensated_probability_is_lower(jump):
    d = derive(params(), jump)
    assert d.XiTilde < d.Xi
    assert d.pTilde < d.p


def test_asset_moments():
    p = params()
    mean, var = asset_moments(p)
    assert mean == pytest.approx(1.1 * math.exp(0.055), rel=1e-15)
    assert var == pytest.approx(1.1**2 * math.exp(0.11) * (math.exp(0.04) - 1), rel=1e-14)
    assert asset_moments(p, t=0.0) == (1.1, 0.0)
    jmean, jvar = asset_moments(p, exponential(0.02, 1.0))
    assert jmean == mean and jvar > var
    with pytest.raises(ValidationError):
        asset_moments(p, t=-1.0)
