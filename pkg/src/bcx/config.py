"""Run configuration: one dataclass shared by single explanations, batch
runs, the CLI and the service. Files use INI syntax with a [run] section;
ablation grids add one section per variant (see README for the key list).
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError

METHODS = ("bcx", "lime")
FAMILIES = ("multiple", "logistic")


@dataclass
class RunConfig:
    method: str = "bcx"
    use_counterfactual_augmentation: bool = False
    balanced: bool = True
    centering: bool = True
    use_quadratic: bool = True
    use_interaction: bool = True
    max_terms: int = 14
    family: str = "logistic"
    T: float = 0.25
    seeds: tuple = (0,)
    test_count: int = 1
    pool_size: int = 50000
    n_neighbourhood: int = 200
    b1: float = 0.4
    b2: float = 0.6
    cf_weight: float = 10.0
    search_steps: int = 200
    refine_tol: float = 1e-4
    boundary_threshold: float = 0.5
    lime_samples: int = 15000
    kernel_width: float = 2.0
    label_chunk: int = 1000

    def __post_init__(self):
        self.seeds = tuple(self.seeds)
        self.validate()

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.max_terms < 1:
            raise ConfigError("max_terms must be >= 1")
        if self.T <= 0:
            raise ConfigError("T must be positive")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if self.test_count < 1:
            raise ConfigError("test_count must be >= 1")
        if not 0 < self.b1 < self.b2 < 1:
            raise ConfigError("need 0 < b1 < b2 < 1")
        if self.pool_size < 1 or self.lime_samples < 1:
            raise ConfigError("pool sizes must be >= 1")
        if self.n_neighbourhood < 3:
            raise ConfigError("n_neighbourhood must be >= 3")
        if self.kernel_width <= 0:
            raise ConfigError("kernel_width must be positive")

    def with_overrides(self, **kw):
        known = {f.name for f in fields(self)}
        unknown = set(kw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, **kw)

    def to_dict(self):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["seeds"] = list(self.seeds)
        return d


_BOOL_KEYS = {
    "use_counterfactual_augmentation",
    "balanced",
    "centering",
    "use_quadratic",
    "use_interaction",
}
_INT_KEYS = {
    "max_terms", "test_count", "pool_size", "n_neighbourhood",
    "search_steps", "lime_samples", "label_chunk",
}
_FLOAT_KEYS = {
    "T", "b1", "b2", "cf_weight", "refine_tol", "boundary_threshold", "kernel_width",
}
_STR_KEYS = {"method", "family"}


def _coerce(key, raw):
    raw = raw.strip()
    if key == "seeds":
        try:
            return tuple(int(v) for v in raw.split(",") if v.strip() != "")
        except ValueError:
            raise ConfigError(f"seeds must be a comma list of integers, got {raw!r}") from None
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"{key} must be a boolean, got {raw!r}")
    if key in _INT_KEYS:
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {raw!r}") from None
    if key in _FLOAT_KEYS:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {raw!r}") from None
    if key in _STR_KEYS:
        return raw
    raise ConfigError(f"unknown config key {key!r}")


def section_to_overrides(section):
    return {key: _coerce(key, raw) for key, raw in section.items()}


def _parser():
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case-sensitive (T vs t)
    return parser


def load_run_config(path):
    """Read a [run] section into a RunConfig."""
    parser = _parser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    if "run" not in parser:
        raise ConfigError(f"{path}: missing [run] section")
    return RunConfig(**section_to_overrides(parser["run"]))


def load_grid(path):
    """Read an ablation grid: {variant name: override dict}, file order."""
    parser = _parser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"grid file not found: {path}")
    grid = {}
    for name in parser.sections():
        if name == "run":
            continue
        grid[name] = section_to_overrides(parser[name])
    if not grid:
        raise ConfigError(f"{path}: no variant sections")
    return grid
