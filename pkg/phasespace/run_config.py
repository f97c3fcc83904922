#!/usr/bin/env python3
"""
Run configuration
Config defaults, overridden by a `key = value` file, overridden by command-line flags
"""

import logging
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Optional

from config import Config
from phasespace.errors import ConfigError, ValidationError
from phasespace.numerics import QuadratureGrid, make_grid
from phasespace.states import OscillatorFrame

logger = logging.getLogger(__name__)

ALIASES = {'lambda_bar': 'hbar'}

# RunConfig field -> Config attribute it overrides for the numerical services
TOLERANCE_FIELDS = {
    'edge_tolerance': 'EDGE_TOLERANCE',
    'realness_tolerance': 'REALNESS_TOLERANCE',
    'tail_tolerance': 'TAIL_TOLERANCE',
    'stats_tail_tolerance': 'STATS_TAIL_TOLERANCE',
    'negativity_tolerance': 'NEGATIVITY_TOLERANCE',
    'norm_drift_tolerance': 'NORM_DRIFT_TOLERANCE',
}


@dataclass(frozen=True)
class RunConfig:
    q_min: float = field(default_factory=lambda: Config.Q_MIN)
    q_max: float = field(default_factory=lambda: Config.Q_MAX)
    n_q: int = field(default_factory=lambda: Config.N_Q)
    hbar: float = field(default_factory=lambda: Config.HBAR)
    mass: float = field(default_factory=lambda: Config.MASS)
    omega: float = field(default_factory=lambda: Config.OMEGA)
    output_dir: str = field(default_factory=lambda: Config.OUTPUT_DIR)
    format: str = field(default_factory=lambda: Config.OUTPUT_FORMAT)
    seed: int = field(default_factory=lambda: Config.SEED)
    log_level: str = field(default_factory=lambda: Config.LOG_LEVEL)
    edge_tolerance: float = field(default_factory=lambda: Config.EDGE_TOLERANCE)
    realness_tolerance: float = field(default_factory=lambda: Config.REALNESS_TOLERANCE)
    tail_tolerance: float = field(default_factory=lambda: Config.TAIL_TOLERANCE)
    stats_tail_tolerance: float = field(default_factory=lambda: Config.STATS_TAIL_TOLERANCE)
    negativity_tolerance: float = field(default_factory=lambda: Config.NEGATIVITY_TOLERANCE)
    norm_drift_tolerance: float = field(default_factory=lambda: Config.NORM_DRIFT_TOLERANCE)

    def __post_init__(self):
        self.grid()
        self.frame()
        if self.format not in Config.OUTPUT_FORMATS:
            raise ValidationError(f"unknown format '{self.format}' "
                                  f"(expected one of {', '.join(Config.OUTPUT_FORMATS)})")
        for name in TOLERANCE_FIELDS:
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")

    def grid(self) -> QuadratureGrid:
        return make_grid(self.q_min, self.q_max, self.n_q, self.hbar)

    def frame(self) -> OscillatorFrame:
        return OscillatorFrame(self.mass, self.omega, self.hbar)

    def with_overrides(self, overrides: Dict[str, Any]) -> 'RunConfig':
        """Apply flag values; None means 'not given'"""
        changes, sources = {}, {}
        for key, value in overrides.items():
            if value is None:
                continue
            name = ALIASES.get(key, key)
            if name not in _field_types():
                raise ValidationError(f"unknown setting '{key}'")
            value = _field_types()[name](value)
            if name in changes and changes[name] != value:
                raise ValidationError(f"conflicting values for {name}: {sources[name]}={changes[name]} "
                                      f"and {key}={value}")
            changes[name], sources[name] = value, key
        return replace(self, **changes) if changes else self

    def apply_tolerances(self) -> None:
        """Push tolerance overrides into Config and the service singletons"""
        from phasespace.dynamics import moyal_propagator
        from phasespace.states import state_builder
        from phasespace.wigner import wigner_transformer

        for name, attribute in TOLERANCE_FIELDS.items():
            setattr(Config, attribute, getattr(self, name))
        state_builder.edge_tolerance = self.edge_tolerance
        state_builder.tail_tolerance = self.tail_tolerance
        wigner_transformer.realness_tolerance = self.realness_tolerance
        moyal_propagator.drift_tolerance = self.norm_drift_tolerance
        moyal_propagator.support_tolerance = self.edge_tolerance


def _field_types() -> Dict[str, type]:
    kinds = {'float': float, 'int': int, 'str': str}
    return {f.name: kinds.get(f.type if isinstance(f.type, str) else f.type.__name__, str)
            for f in fields(RunConfig)}


def parse_config_text(text: str) -> Dict[str, Any]:
    """
    Parse `key = value` lines

    Blank lines and `#` comments are skipped; unknown keys and unparsable
    values raise ConfigError carrying the line number.
    """
    types = _field_types()
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"expected 'key = value', got '{raw.strip()}'", line=number)
        key, value = (part.strip() for part in line.split('=', 1))
        name = ALIASES.get(key, key)
        if name not in types:
            raise ConfigError(f"unknown key '{key}'", line=number)
        try:
            parsed = types[name](value)
        except ValueError:
            raise ConfigError(f"bad value '{value}' for {key}", line=number)
        if name in values and values[name] != parsed:
            raise ConfigError(f"{key} = {value} conflicts with the earlier {name} = {values[name]}", line=number)
        values[name] = parsed
    return values


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Build the layered RunConfig: Config defaults, then the file, then flag overrides"""
    run_config = RunConfig()
    if path:
        with open(path) as handle:
            file_values = parse_config_text(handle.read())
        try:
            run_config = replace(run_config, **file_values)
        except ValidationError as e:
            raise ConfigError(f"{path}: {e}")
        logger.info(f"🔧 Loaded {len(file_values)} setting(s) from {path}")
    return run_config.with_overrides(overrides or {})
