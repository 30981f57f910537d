"""Flat ``key = value`` run configuration.

One assignment per line, ``#`` starts a comment, UTF-8. Lists are comma
separated. Example::

    sigma = 0.2
    beta = 0.1
    rho = 0.7        # or "monotone": solve Lambda^2 = zeta^2 for rho
    theta = 0.7
    mu = 0.055
    alpha = 0.05
    a0 = 1.1
    b0 = 1
    t = 1
    lambda = 0.02
    jump_law = exponential
    gamma_or_c = 1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .continuous import solve_monotone_rho
from .errors import ConfigError, ValidationError
from .model import ContractParams, JumpSpec

CONTRACT_KEYS = ("mu", "alpha", "sigma", "beta", "rho", "theta", "a0", "b0", "t")
JUMP_KEYS = ("lambda", "jump_law", "gamma_or_c")
OPTION_KEYS = ("nu", "resolution", "samples", "seed", "workers", "mode", "n", "sweep_param", "sweep_values", "units")
KNOWN_KEYS = CONTRACT_KEYS + JUMP_KEYS + OPTION_KEYS

# config key for each ContractParams / JumpSpec field
_FIELD_TO_KEY = {"A0": "a0", "B0": "b0", "T": "t", "lam": "lambda", "gamma": "gamma_or_c", "c": "gamma_or_c"}
_KEY_TO_FIELD = {"a0": "A0", "b0": "B0", "t": "T"}

JUMP_LAWS = ("none", "exponential", "constant")
DEFAULT_NUS = (0.90, 0.915, 0.93, 0.945, 0.96, 0.975)


@dataclass(frozen=True)
class RunConfig:
    params: ContractParams
    jump: JumpSpec
    nus: tuple = DEFAULT_NUS
    resolution: int = 1000
    samples: int = 1_000_000
    seed: int = 42
    workers: int = 1
    mode: str = "limiting"
    n: Optional[int] = None
    sweep_param: Optional[str] = None
    sweep_values: tuple = ()
    units: str = "fraction"
    rho_monotone: bool = False
    lines: dict = field(default_factory=dict, compare=False, repr=False)

    def sweep(self):
        """``(label, RunConfig)`` per sweep value, or the config itself when not sweeping."""
        if not self.sweep_param:
            return [(None, self)]
        out = []
        for value in self.sweep_values:
            values = _contract_values(self.params, self.jump)
            values[self.sweep_param] = value
            params, jump = _build_model(values, self.lines)
            out.append((f"{self.sweep_param}={value:g}", replace(self, params=params, jump=jump, sweep_param=None)))
        return out


def _contract_values(params: ContractParams, jump: JumpSpec) -> dict:
    values = {key: getattr(params, _KEY_TO_FIELD.get(key, key)) for key in CONTRACT_KEYS}
    values["lambda"] = jump.lam
    law = jump.size_law
    values["jump_law"] = "none" if law is None else ("exponential" if hasattr(law, "gamma") else "constant")
    values["gamma_or_c"] = None if law is None else getattr(law, "gamma", getattr(law, "c", None))
    return values


def _number(key, raw, line, integer=False):
    try:
        value = int(raw) if integer else float(raw)
    except ValueError:
        kind = "an integer" if integer else "a number"
        raise ConfigError(f"expected {kind}, got {raw!r}", key, line) from None
    if not integer and not math.isfinite(value):
        raise ConfigError("must be finite", key, line)
    return value


def _number_list(key, raw, line):
    items = [item.strip() for item in raw.split(",") if item.strip()]
    if not items:
        raise ConfigError("expected a comma-separated list", key, line)
    return tuple(_number(key, item, line) for item in items)


def _build_model(values: dict, lines: dict):
    for key in ("mu", "alpha", "sigma", "beta", "theta", "a0", "b0", "t"):
        if values.get(key) is None:
            raise ConfigError("required key is missing", key, lines.get(key))
    if values.get("rho") is None:
        raise ConfigError("required key is missing", "rho", lines.get("rho"))
    law = values.get("jump_law") or "none"
    lam = values.get("lambda") or 0.0
    size = values.get("gamma_or_c")
    try:
        params = ContractParams(
            mu=values["mu"],
            alpha=values["alpha"],
            sigma=values["sigma"],
            beta=values["beta"],
            rho=values["rho"],
            theta=values["theta"],
            A0=values["a0"],
            B0=values["b0"],
            T=values["t"],
        )
        if law == "none":
            jump = JumpSpec(lam, None)
        else:
            if size is None:
                raise ConfigError(f"jump_law = {law} needs gamma_or_c", "gamma_or_c", lines.get("jump_law"))
            jump = JumpSpec.exponential(lam, size) if law == "exponential" else JumpSpec.constant(lam, size)
    except ValidationError as exc:
        key = _FIELD_TO_KEY.get(exc.field, exc.field)
        raise ConfigError(str(exc).split(": ", 1)[-1], key, lines.get(key)) from None
    return params, jump


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document.

    Raises :class:`ConfigError` naming the offending key (and line, when it
    appears in the document) for syntax errors, unknown or duplicate keys,
    missing parameters and invariant violations.
    """
    raw: dict = {}
    lines: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", line=lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        key = key.lower()
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key not in KNOWN_KEYS:
            raise ConfigError("unknown key", key, lineno)
        if key in raw:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key, lineno)
        if not value:
            raise ConfigError("empty value", key, lineno)
        raw[key] = value
        lines[key] = lineno

    values: dict = {}
    rho_monotone = False
    for key in CONTRACT_KEYS + ("lambda", "gamma_or_c"):
        if key not in raw:
            continue
        if key == "rho" and raw[key].lower() == "monotone":
            rho_monotone = True
            continue
        values[key] = _number(key, raw[key], lines[key])
    law = raw.get("jump_law", "none").lower()
    if law not in JUMP_LAWS:
        raise ConfigError(f"jump_law must be one of {', '.join(JUMP_LAWS)}", "jump_law", lines.get("jump_law"))
    values["jump_law"] = law
    if rho_monotone:
        for key in ("sigma", "beta", "theta"):
            if key not in values:
                raise ConfigError("required key is missing", key, lines.get(key))
        try:
            values["rho"] = solve_monotone_rho(values["sigma"], values["beta"], values["theta"])
        except Exception as exc:
            raise ConfigError(f"cannot solve for the monotone rho: {exc}", "rho", lines["rho"]) from None
    params, jump = _build_model(values, lines)

    options: dict = {}
    if "nu" in raw:
        nus = _number_list("nu", raw["nu"], lines["nu"])
        if any(not 0.0 < v < 1.0 for v in nus):
            raise ConfigError("confidence levels must lie in (0, 1)", "nu", lines["nu"])
        options["nus"] = nus
    for key in ("resolution", "samples", "seed", "workers", "n"):
        if key in raw:
            options[key] = _number(key, raw[key], lines[key], integer=True)
    if options.get("resolution", 2) < 2:
        raise ConfigError("must be >= 2", "resolution", lines["resolution"])
    if options.get("samples", 1) < 1:
        raise ConfigError("must be >= 1", "samples", lines["samples"])
    if options.get("workers", 1) < 1:
        raise ConfigError("must be >= 1", "workers", lines["workers"])
    if not 0 <= options.get("seed", 0) < 2 ** 64:
        raise ConfigError("must be a 64-bit unsigned integer", "seed", lines["seed"])
    if "mode" in raw:
        mode = raw["mode"].lower()
        if mode not in ("limiting", "finite"):
            raise ConfigError("mode must be 'limiting' or 'finite'", "mode", lines["mode"])
        options["mode"] = mode
    if options.get("mode") == "finite" and options.get("n", 0) < 1:
        raise ConfigError("finite mode needs n >= 1", "n", lines.get("n", lines.get("mode")))
    if "units" in raw:
        units = raw["units"].lower()
        if units not in ("fraction", "percent"):
            raise ConfigError("units must be 'fraction' or 'percent'", "units", lines["units"])
        options["units"] = units
    if ("sweep_param" in raw) != ("sweep_values" in raw):
        missing = "sweep_values" if "sweep_param" in raw else "sweep_param"
        raise ConfigError("sweep_param and sweep_values go together", missing, None)
    if "sweep_param" in raw:
        param = raw["sweep_param"].lower()
        if param not in CONTRACT_KEYS + ("lambda", "gamma_or_c"):
            raise ConfigError("can only sweep a model parameter", "sweep_param", lines["sweep_param"])
        options["sweep_param"] = param
        options["sweep_values"] = _number_list("sweep_values", raw["sweep_values"], lines["sweep_values"])

    cfg = RunConfig(params=params, jump=jump, rho_monotone=rho_monotone, lines=lines, **options)
    cfg.sweep()  # validate every swept parameter set up front
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture, e.g. ``fixture_path("fig4")``."""
    path = Path(__file__).with_name("fixtures") / f"{name}.cfg"
    if not path.exists():
        raise ConfigError(f"no bundled fixture named {name!r}")
    return path


def load_fixture(name: str) -> RunConfig:
    return load_config(fixture_path(name))
