"""Loading of run configuration files.

A config file is a flat TOML document. Mechanism keys are ``a, b, h, k1, k2,
m, g``; optional solver keys are ``max_iterations``, ``residual_tolerance``,
``tau_tol`` (fraction of ``m*g``) and ``eps_slack`` (fraction of cable
length). Missing mechanism keys take the packaged defaults.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from sinkwinch.errors import ConfigError
from sinkwinch.geometry import MechanismConfig
from sinkwinch.solver import SolverOptions
from sinkwinch.traversal import TraversalOptions

MECHANISM_KEYS = ("a", "b", "h", "k1", "k2", "m", "g")
SOLVER_KEYS = ("max_iterations", "residual_tolerance")
TRAVERSAL_KEYS = ("tau_tol", "eps_slack")
FORMATS = ("table", "json", "csv")


@dataclass(frozen=True)
class RunConfig:
    mechanism: MechanismConfig = field(default_factory=MechanismConfig)
    options: TraversalOptions = field(default_factory=TraversalOptions)
    output_format: str = "table"

    def __post_init__(self):
        if self.output_format not in FORMATS:
            raise ConfigError(f"unknown output format {self.output_format!r}")


def default_config_text() -> str:
    return resources.files("sinkwinch").joinpath("data/default.toml").read_text()


def parse_run_config(values: Mapping[str, object], output_format: str = "table") -> RunConfig:
    """Validate a flat mapping and split it into mechanism and solver settings."""
    known = set(MECHANISM_KEYS + SOLVER_KEYS + TRAVERSAL_KEYS)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in values.items():
        if isinstance(value, (dict, list)):
            raise ConfigError(f"config key {key!r} must be a scalar")
    mech = {k: values[k] for k in MECHANISM_KEYS if k in values}
    defaults = tomllib.loads(default_config_text())
    mechanism = MechanismConfig.from_mapping({**defaults, **mech})

    solver = SolverOptions()
    try:
        if "max_iterations" in values:
            mi = values["max_iterations"]
            if not isinstance(mi, int) or isinstance(mi, bool):
                raise ConfigError("max_iterations must be an integer")
            solver = replace(solver, max_iterations=mi)
        if "residual_tolerance" in values:
            solver = replace(solver, residual_tolerance=float(values["residual_tolerance"]))
        traversal = TraversalOptions(
            solver=solver,
            **{k: float(values[k]) for k in TRAVERSAL_KEYS if k in values},
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return RunConfig(mechanism, traversal, output_format)


def load_run_config(path: Optional[Union[str, Path]], output_format: str = "table") -> RunConfig:
    """Read a config file, or the packaged defaults when ``path`` is None.

    Raises:
        ConfigError: unreadable file, malformed TOML, unknown keys or invalid values.
    """
    if path is None:
        return parse_run_config({}, output_format)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        values = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parse_run_config(values, output_format)
