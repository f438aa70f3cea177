"""Simulation configuration: defaults, validation, and the key=value file form."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

__all__ = ["SimConfig", "ConfigError", "parse_config_text", "dump_config_text", "DEFAULT_SEED"]

DEFAULT_SEED = 1290
DEFAULT_N_GRID = (200, 400, 600, 800, 1000, 1500, 2000)
DEFAULT_QUERY_BUDGETS = (1, 10, 50, 100)


class ConfigError(ValueError):
    """Invalid configuration value; the message names the offending field."""


@dataclass(frozen=True)
class SimConfig:
    """Full parameterisation of the simulation harness.

    Defaults reproduce the reference toy setup: 20 categories, four rare
    ones of mass 0.0025 each, rarity threshold 0.01, flip probability 0.25,
    1000 users for recovery, a 200..2000 grid for error decay, and 50 runs
    per grid point.
    """

    k: int = 20
    rare_count: int = 4
    rare_mass: float = 0.0025
    alpha: float = 0.01
    p: float = 0.25
    n_default: int = 1000
    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    runs: int = 50
    pac_runs: int = 2000
    query_budgets: tuple[int, ...] = DEFAULT_QUERY_BUDGETS
    utility_n: int = 10000
    zipf_exponent: float = 1.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.k < 2:
            raise ConfigError(f"k must be at least 2, got {self.k!r}")
        if not 0 <= self.rare_count < self.k:
            raise ConfigError(f"rare_count must lie in [0, k), got {self.rare_count!r}")
        if self.rare_count > 0 and not 0.0 < self.rare_mass:
            raise ConfigError(f"rare_mass must be positive, got {self.rare_mass!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie strictly between 0 and 1, got {self.alpha!r}")
        if self.rare_count * self.rare_mass >= 1.0:
            raise ConfigError(
                f"rare_count*rare_mass must stay below 1, got {self.rare_count * self.rare_mass!r}"
            )
        if self.rare_count > 0 and self.rare_mass >= self.alpha:
            raise ConfigError(
                f"rare_mass must stay below alpha, got rare_mass={self.rare_mass!r} alpha={self.alpha!r}"
            )
        if not 0.0 <= self.p < 1.0:
            raise ConfigError(f"p must lie in [0, 1), got {self.p!r}")
        if self.n_default < 1:
            raise ConfigError(f"n_default must be positive, got {self.n_default!r}")
        if not self.n_grid or any(n <= 0 for n in self.n_grid):
            raise ConfigError(f"n_grid entries must be positive, got {self.n_grid!r}")
        if self.runs < 2:
            raise ConfigError(f"runs must be at least 2, got {self.runs!r}")
        if self.pac_runs < 1:
            raise ConfigError(f"pac_runs must be positive, got {self.pac_runs!r}")
        if not self.query_budgets or any(q < 1 for q in self.query_budgets):
            raise ConfigError(f"query_budgets entries must be positive, got {self.query_budgets!r}")
        if self.utility_n < 1:
            raise ConfigError(f"utility_n must be positive, got {self.utility_n!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


_INT_FIELDS = {"k", "rare_count", "n_default", "runs", "pac_runs", "utility_n", "seed"}
_FLOAT_FIELDS = {"rare_mass", "alpha", "p", "zipf_exponent"}
_INT_LIST_FIELDS = {"n_grid", "query_budgets"}
FIELD_NAMES = tuple(f.name for f in fields(SimConfig))


def _parse_value(name: str, raw: str):
    try:
        if name in _INT_FIELDS:
            return int(raw)
        if name in _FLOAT_FIELDS:
            return float(raw)
        if name in _INT_LIST_FIELDS:
            return tuple(int(part) for part in raw.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"{name} has malformed value {raw!r}") from exc
    raise ConfigError(f"unknown config field {name!r}")


def parse_config_text(text: str, base: SimConfig | None = None) -> SimConfig:
    """Apply key=value lines on top of `base` (or the built-in defaults).

    Blank lines and lines starting with '#' are ignored.
    """
    cfg = base if base is not None else SimConfig()
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        name, raw = line.split("=", 1)
        name = name.strip()
        if name not in FIELD_NAMES:
            raise ConfigError(f"unknown config field {name!r}")
        overrides[name] = _parse_value(name, raw.strip())
    return replace(cfg, **overrides)


def dump_config_text(cfg: SimConfig) -> str:
    """Render a config as key=value lines; parse_config_text inverts this."""
    lines = []
    for name in FIELD_NAMES:
        value = getattr(cfg, name)
        if name in _INT_LIST_FIELDS:
            rendered = ",".join(str(v) for v in value)
        elif name in _FLOAT_FIELDS:
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{name}={rendered}")
    return "\n".join(lines) + "\n"
