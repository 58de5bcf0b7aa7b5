"""Run configuration for the batch propagator.

Plain `key = value` text, one per line, `#` comments, with an explicit
schema version.  Coefficient lines may repeat:

    schema_version = 1
    p = 2
    q = 3
    M = 1.0
    kappa = 1.0
    s1_max = 1
    n_max = 1
    ...
    times = 0.0, 0.5, 1.0
    phi0_coef = 0 0 0 0 0 0 0 0 0 : 1.0 : 0.0     # s1..j i : re : im
    preset = none

Validation errors carry the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config", "load_config"]

_INT_KEYS = {"schema_version", "p", "q", "s1_max", "n_max", "m_max", "l_max",
             "k_max", "j_max", "i_max", "n_basis", "grid_x", "grid_t1",
             "grid_t2", "grid_theta", "grid_y"}
_FLOAT_KEYS = {"M", "kappa", "tail_warn_fraction", "preset_x0",
               "preset_width", "preset_amplitude", "lambda_max"}
_STR_KEYS = {"sigma_rule", "preset", "out_dir", "out_format", "cache_dir"}
_LIST_KEYS = {"times"}
_COEF_KEYS = {"phi0_coef", "phi1_coef"}

_DEFAULTS = {
    "sigma_rule": "prose", "M": 0.0, "kappa": 1.0,
    "s1_max": 0, "n_max": 0, "m_max": 0, "l_max": 0, "k_max": 0, "j_max": 0,
    "i_max": 4, "n_basis": 40,
    "grid_x": 36, "grid_t1": 10, "grid_t2": 10, "grid_theta": 12,
    "grid_y": 36,
    "times": [0.0], "preset": "none",
    "preset_x0": 0.8, "preset_width": 0.25, "preset_amplitude": 1.0,
    "out_dir": "out", "out_format": "csv", "cache_dir": None,
    "tail_warn_fraction": 0.1,
}


@dataclass
class RunConfig:
    p: int
    q: int
    sigma_rule: str
    M: float
    kappa: float
    s1_max: int
    n_max: int
    m_max: int
    l_max: int
    k_max: int
    j_max: int
    i_max: int
    n_basis: int
    grid_x: int
    grid_t1: int
    grid_t2: int
    grid_theta: int
    grid_y: int
    times: list
    preset: str
    preset_x0: float
    preset_width: float
    preset_amplitude: float
    out_dir: str
    out_format: str
    cache_dir: str | None
    tail_warn_fraction: float
    phi0_coefs: list = field(default_factory=list)
    phi1_coefs: list = field(default_factory=list)

    @property
    def grid_shape(self) -> tuple:
        return (self.grid_x, self.grid_t1, self.grid_t2, self.grid_theta,
                self.grid_y)


def _parse_coef(value: str, lineno: int):
    parts = [p.strip() for p in value.split(":")]
    if len(parts) != 3:
        raise ConfigError(
            f"line {lineno}: coefficient needs 'indices : re : im'")
    try:
        idx = tuple(int(tok) for tok in parts[0].split())
        re_part, im_part = float(parts[1]), float(parts[2])
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: {exc}") from exc
    if len(idx) != 9:
        raise ConfigError(
            f"line {lineno}: need 9 integers (s1 s2 s3 n m l k j i), "
            f"got {len(idx)}")
    return idx, complex(re_part, im_part)


def parse_config(text: str) -> RunConfig:
    values = dict(_DEFAULTS)
    values["phi0_coefs"] = []
    values["phi1_coefs"] = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _COEF_KEYS:
            values[key.replace("_coef", "_coefs")].append(
                _parse_coef(value, lineno))
            continue
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _STR_KEYS:
                values[key] = value
            elif key in _LIST_KEYS:
                values[key] = [float(tok) for tok in value.split(",") if tok.strip()]
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    if "schema_version" not in seen:
        raise ConfigError("line 1: schema_version is required")
    if values.pop("schema_version") != 1:
        raise ConfigError("line 1: unsupported schema_version (expected 1)")
    for required in ("p", "q"):
        if required not in seen:
            raise ConfigError(f"line 1: missing required key {required!r}")
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.kappa <= 0.0:
        raise ConfigError("kappa must be positive")
    if cfg.M < 0.0:
        raise ConfigError("M must be nonnegative")
    for name in ("s1_max", "n_max", "m_max", "l_max", "k_max", "j_max",
                 "i_max"):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"{name} must be nonnegative")
    if cfg.n_basis < 8:
        raise ConfigError("n_basis must be at least 8")
    if min(cfg.grid_shape) < 4:
        raise ConfigError("grid resolutions must be at least 4")
    if not cfg.times:
        raise ConfigError("times must not be empty")
    if cfg.sigma_rule not in ("prose", "display"):
        raise ConfigError("sigma_rule must be 'prose' or 'display'")
    if cfg.out_format not in ("csv", "json"):
        raise ConfigError("out_format must be 'csv' or 'json'")
    if cfg.preset not in ("none", "gaussian_x"):
        raise ConfigError("preset must be 'none' or 'gaussian_x'")
    if cfg.preset == "none" and not cfg.phi0_coefs and not cfg.phi1_coefs:
        raise ConfigError("no data: give phi0_coef/phi1_coef lines or a preset")


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
