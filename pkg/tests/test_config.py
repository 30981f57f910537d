import pytest

from portloss.config import DEFAULT_NUS, fixture_path, load_config, load_fixture, parse_config
from portloss.errors import ConfigError
from portloss.continuous import solve_monotone_rho

BASE = """\
mu = 0.055
alpha = 0.05
sigma = 0.2
beta = 0.1
rho = 0.7
theta = 0.7
a0 = 1.1
b0 = 1
t = 1
"""


def test_fixture_fig4():
    cfg = load_fixture("fig4")
    p = cfg.params
    assert (p.sigma, p.beta, p.rho, p.theta) == (0.2, 0.1, 0.7, 0.7)
    assert p.alpha == 0.05
    assert cfg.jump.lam == 0.02 and cfg.jump.size_law.gamma == 1.0
    assert cfg.nus == DEFAULT_NUS and cfg.units == "fraction"


def test_fixture_fig6_solves_rho():
    cfg = load_fixture("fig6")
    assert cfg.rho_monotone
    assert cfg.params.rho == solve_monotone_rho(0.2, 0.1, 0.7)


def test_fixture_fig3_sweep():
    cfg = load_fixture("fig3")
    sweep = cfg.sweep()
    assert [label for label, _ in sweep] == ["rho=0.3", "rho=0.5", "rho=0.7", "rho=0.9"]
    assert [c.params.rho for _, c in sweep] == [0.3, 0.5, 0.7, 0.9]


def test_all_fixtures_load():
    for name in ("fig3", "fig4", "fig6", "multimodal"):
        assert fixture_path(name).exists()
        load_fixture(name)
    with pytest.raises(ConfigError):
        fixture_path("nope")


def test_comments_whitespace_and_case():
    cfg = parse_config("# header\n\n" + BASE.replace("sigma = 0.2", "  SIGMA=0.2   # asset vol"))
    assert cfg.params.sigma == 0.2
    assert not cfg.jump.active


def test_options():
    cfg = parse_config(BASE + "nu = 0.9, 0.99\nsamples = 5000\nseed = 7\nworkers = 2\nmode = finite\nn = 25\nunits = percent\n")
    assert cfg.nus == (0.9, 0.99)
    assert (cfg.samples, cfg.seed, cfg.workers, cfg.mode, cfg.n, cfg.units) == (5000, 7, 2, "finite", 25, "percent")


def test_constant_jumps():
    cfg = parse_config(BASE + "lambda = 1.5\njump_law = constant\ngamma_or_c = 0.8\n")
    assert cfg.jump.size_law.c == 0.8


def _error(text):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    return exc.value


def test_invariant_breach_names_key_and_line():
    err = _error(BASE.replace("rho = 0.7", "rho = 1.5"))
    assert err.key == "rho" and err.line == 5
    assert "rho" in str(err) and "line 5" in str(err)


def test_missing_key_named():
    err = _error(BASE.replace("sigma = 0.2\n", ""))
    assert err.key == "sigma"


@pytest.mark.parametrize(
    "extra, key",
    [
        ("colour = red\n", "colour"),
        ("mu = 0.1\n", "mu"),
        ("lambda = abc\n", "lambda"),
        ("jump_law = gaussian\n", "jump_law"),
        ("jump_law = exponential\nlambda = 0.1\n", "gamma_or_c"),
        ("lambda = 0.1\njump_law = exponential\ngamma_or_c = -1\n", "gamma_or_c"),
        ("nu = 0.9, 1.2\n", "nu"),
        ("samples = 1.5\n", "samples"),
        ("mode = finite\n", "n"),
        ("mode = sometimes\n", "mode"),
        ("units = basis_points\n", "units"),
        ("sweep_param = rho\n", "sweep_values"),
        ("sweep_param = nu\nsweep_values = 0.1\n", "sweep_param"),
        ("sweep_param = rho\nsweep_values = 0.3, 2.0\n", "rho"),
    ],
)
def test_errors_name_the_key(extra, key):
    assert _error(BASE + extra).key == key


def test_non_finite_value():
    assert _error(BASE.replace("t = 1", "t = inf")).key == "t"


def test_syntax_error_names_line():
    err = _error(BASE + "this line has no equals\n")
    assert err.line == 10


def test_monotone_rho_needs_inputs():
    err = _error(BASE.replace("rho = 0.7", "rho = monotone").replace("beta = 0.1\n", ""))
    assert err.key == "beta"


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
    path = tmp_path / "ok.cfg"
    path.write_text(BASE, encoding="utf-8")
    assert load_config(path).params.mu == 0.055
