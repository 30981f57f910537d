"""``portloss`` command line.

Data goes to ``--out`` (or stdout) as CSV with a header row; diagnostics go to
stderr. Exit status is 0 on success, 1 on a model, numerical or ``--check``
failure, 2 on bad usage or configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from contextlib import contextmanager
from dataclasses import replace

import numpy as np

from . import __version__
from .config import CONTRACT_KEYS, RunConfig, load_config, load_fixture
from .continuous import ContinuousLossLaw
from .errors import ConfigError, DegenerateModelError, PortlossError
from .jump import JumpLossLaw
from .montecarlo import (
    SimConfig,
    ks_distance,
    ks_distance_discrete,
    sample_finite_portfolio,
    sample_limiting_loss,
)
from .tables import TABLES, build_table

log = logging.getLogger("portloss")

EPSILON = 1e-6
MIN_SAMPLES = 1000
# analytic CDF evaluations used for the KS bound of jump laws
KS_EVALS = 4000


class UsageError(PortlossError):
    pass


def make_law(cfg: RunConfig):
    """Jump mixture law when jumps are active, otherwise the closed-form law."""
    if cfg.jump.active:
        return JumpLossLaw.from_params(cfg.params, cfg.jump)
    return ContinuousLossLaw.from_params(cfg.params)


def _fmt(value, digits=10):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return format(float(value), f".{digits}g")


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        yield fh


def _write_csv(path, header, rows):
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    with _output(path) as fh:
        fh.write(buf.getvalue())


def _parse_list(text, name):
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"--{name}: expected a comma-separated list of numbers") from None
    if not values:
        raise UsageError(f"--{name}: empty list")
    return values


def _resolve_config(args) -> RunConfig:
    if args.config and args.fixture:
        raise UsageError("give either --config or --fixture, not both")
    if args.fixture:
        cfg = load_fixture(args.fixture)
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise UsageError("this command needs --config FILE or --fixture NAME")
    overrides = {}
    if getattr(args, "nu", None):
        nus = _parse_list(args.nu, "nu")
        if any(not 0.0 < v < 1.0 for v in nus):
            raise UsageError("--nu: confidence levels must lie in (0, 1)")
        overrides["nus"] = nus
    for name in ("resolution", "samples", "seed", "workers"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "sweep", None):
        param, _, values = args.sweep.partition("=")
        param = param.strip().lower()
        if param not in CONTRACT_KEYS + ("lambda", "gamma_or_c") or not values:
            raise UsageError("--sweep: expected PARAM=V1,V2,... over a model parameter")
        overrides["sweep_param"] = param
        overrides["sweep_values"] = _parse_list(values, "sweep")
    if getattr(args, "units", None):
        overrides["units"] = args.units
    cfg = replace(cfg, **overrides)
    cfg.sweep()
    return cfg


# -- table -------------------------------------------------------------------


def cmd_table(args) -> int:
    percent = args.units != "fraction"
    scale = 1.0 if percent else 0.01
    digits = 2 if percent else 4
    rows = build_table(args.which)
    nus = (0.90, 0.915, 0.93, 0.945, 0.96, 0.975)
    header = ["gamma", "series"] + [f"{nu:g}" for nu in nus]
    out = []
    for row in rows:
        out.append([row.gamma_label, "model"] + [f"{100 * v * scale:.{digits}f}" for v in row.values])
        out.append([row.gamma_label, "paper"] + [f"{p * scale:.{digits}f}" for p in row.published])
        out.append([row.gamma_label, "abs_deviation"] + [f"{d * scale:.{digits}f}" for d in row.deviations_pp])
    _write_csv(args.out, header, out)
    failed = [row for row in rows if not row.ok]
    for row in rows:
        log.info(
            "%s gamma=%s max deviation %.4f pp (tolerance %.2f pp)",
            args.which, row.gamma_label, max(row.deviations_pp), row.tolerance_pp,
        )
    if args.check and failed:
        for row in failed:
            log.error("%s gamma=%s exceeds %.2f pp", args.which, row.gamma_label, row.tolerance_pp)
        return 1
    return 0


# -- density -----------------------------------------------------------------


def density_grid(cfg: RunConfig, resolution: int):
    """Uniform grid over (EPSILON, 1 - EPSILON) and one density column per sweep value."""
    if resolution < 2:
        raise UsageError("resolution must be >= 2")
    x = np.linspace(EPSILON, 1.0 - EPSILON, resolution)
    columns = []
    for label, sub in cfg.sweep():
        law = make_law(sub)
        if law.is_degenerate:
            where = f" ({label})" if label else ""
            raise DegenerateModelError(
                f"Lambda = 0{where}: the limiting loss has no density (assets and liabilities load equally on the factor)"
            )
        columns.append((label, np.asarray(law.limiting_density(x), dtype=float)))
    return x, columns


def cmd_density(args) -> int:
    cfg = _resolve_config(args)
    x, columns = density_grid(cfg, cfg.resolution)
    percent = cfg.units == "percent"
    xs = 100.0 * x if percent else x
    header = ["x"] + ["density" if label is None else f"density[{label}]" for label, _ in columns]
    rows = []
    for i in range(x.size):
        rows.append([_fmt(xs[i])] + [_fmt(col[i] / 100.0 if percent else col[i]) for _, col in columns])
    _write_csv(args.out, header, rows)
    return 0


# -- simulate ----------------------------------------------------------------


def simulate(cfg: RunConfig):
    """Run the configured simulation; returns ``(result, summary_rows, ks, against)``."""
    if cfg.samples < MIN_SAMPLES:
        raise UsageError(f"need at least {MIN_SAMPLES} samples, got {cfg.samples}")
    law = make_law(cfg)
    sim = SimConfig(cfg.samples, cfg.seed, cfg.workers, cfg.mode, cfg.n)
    degenerate = law.is_degenerate and not cfg.jump.active
    if cfg.mode == "finite":
        result = sample_finite_portfolio(cfg.params, cfg.jump, cfg.n, sim)
    else:
        result = sample_limiting_loss(law, sim)

    mean = law.mean()
    var_limit = law.variance()
    if cfg.mode == "finite":
        variance = var_limit + (mean - mean * mean - var_limit) / cfg.n
    else:
        variance = var_limit
    rows = [
        ("mean", result.mean(), result.mean_se(), mean),
        ("variance", result.variance(), None, variance),
    ]
    for nu in cfg.nus:
        if cfg.mode == "finite":
            q = es = None
        elif degenerate:
            q = es = law.derived.p
        else:
            q, es = law.percentile(nu), law.expected_shortfall(nu)
        rows.append((f"percentile_{nu:g}", result.percentile(nu), result.percentile_se(nu), q))
        rows.append((f"es_{nu:g}", result.expected_shortfall(nu), result.expected_shortfall_se(nu), es))

    if degenerate:
        ks, against = ks_distance_discrete(result, [law.derived.p], [1.0]), "point mass at p"
    elif cfg.mode == "finite" and not cfg.jump.active:
        support = np.arange(cfg.n + 1) / cfg.n
        cum = np.minimum(np.cumsum(law.finite_pmf_vector(cfg.n)), 1.0)
        ks, against = ks_distance_discrete(result, support, cum), f"finite-portfolio law (n={cfg.n})"
    elif cfg.mode == "finite":
        ks, against = ks_distance(result, law.limiting_cdf, KS_EVALS), "limiting law"
    else:
        evals = None if isinstance(law, ContinuousLossLaw) else KS_EVALS
        ks, against = ks_distance(result, law.score_cdf, evals, on_scores=True), "limiting law"
    rows.append(("ks_distance", ks, None, None))
    return result, rows, ks, against


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    result, rows, ks, against = simulate(cfg)
    scale = 100.0 if cfg.units == "percent" else 1.0

    def scaled(name, v):
        if v is None or name == "ks_distance":
            return v
        return v * scale * scale if name == "variance" else v * scale

    header = ["statistic", "value", "standard_error", "analytic"]
    _write_csv(args.out, header, [[name] + [_fmt(scaled(name, v)) for v in vals] for name, *vals in rows])
    print(f"KS distance vs {against}: {ks:.6f} (N = {result.count})", file=sys.stderr)
    if args.ecdf:
        x = np.linspace(0.0, 1.0, cfg.resolution)
        _write_csv(args.ecdf, ["x", "ecdf"], [[_fmt(a * scale), _fmt(b)] for a, b in zip(x, result.ecdf(x))])
    return 0


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="portloss",
        description="Limiting loss distributions of large loan portfolios with stochastic liabilities and systemic jumps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, units_default):
        p.add_argument("--out", help="output CSV file (default: stdout)")
        units = p.add_mutually_exclusive_group()
        units.add_argument("--percent", dest="units", action="store_const", const="percent")
        units.add_argument("--fraction", dest="units", action="store_const", const="fraction")
        p.set_defaults(units=units_default)

    def model_source(p):
        p.add_argument("--config", metavar="FILE", help="key = value parameter file")
        p.add_argument("--fixture", metavar="NAME", help="bundled fixture: fig3, fig4, fig6, multimodal")

    p = sub.add_parser("table", help="regenerate a published percentile / expected-shortfall table")
    p.add_argument("which", choices=TABLES)
    p.add_argument("--check", action="store_true", help="exit 1 if any deviation exceeds its tolerance")
    common(p, "percent")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("density", help="limiting loss density on a uniform grid")
    model_source(p)
    p.add_argument("--resolution", type=int, metavar="N")
    p.add_argument("--sweep", metavar="PARAM=V1,V2,...", help="one density column per value")
    common(p, None)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("simulate", help="Monte Carlo summary and KS distance to the analytic law")
    model_source(p)
    p.add_argument("--samples", type=int, metavar="N")
    p.add_argument("--seed", type=int, metavar="N")
    p.add_argument("--workers", type=int, metavar="N")
    p.add_argument("--nu", metavar="LIST", help="comma-separated confidence levels")
    p.add_argument("--resolution", type=int, metavar="N", help="ECDF grid size for --ecdf")
    p.add_argument("--ecdf", metavar="FILE", help="also write the ECDF on a uniform grid")
    common(p, None)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="portloss: %(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"portloss: error: {exc}", file=sys.stderr)
        return 2
    except PortlossError as exc:
        print(f"portloss: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"portloss: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
