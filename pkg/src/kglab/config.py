"""Plain-text configuration (key = value sections) with a fixed schema.

Sections and keys::

    [model]   alpha
    [grid]    L, dx
    [time]    T, dt, sample_stride
    [k_grid]  k_min, k_max, n_log, n_lin
    [data]    b, zeta_shape (gaussian | compact_bump | custom_file),
              zeta_amplitude, zeta_file, epsilon0
    [shoot]   horizon, tol, s_max (blank = automatic bracket sizing)
    [fit]     t1, t2, envelope_width
    [output]  dir

Unknown sections or keys are rejected.  All module-level positivity, CFL and
light-cone constraints are re-validated here so a bad file fails before any
computation starts.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

import numpy as np


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 2 in the CLI."""


@dataclass
class Config:
    alpha: float = 1.5
    L: float = 170.0
    dx: float = 0.05
    T: float = 150.0
    dt: float = 0.04
    sample_stride: float = 1.0
    k_min: float = 1e-3
    k_max: float = 40.0
    n_log: int = 64
    n_lin: int = 256
    b: float = 2.5e-3
    zeta_shape: str = "gaussian"
    zeta_amplitude: float = 1.0
    zeta_file: str = ""
    epsilon0: float = 0.05
    horizon: float = 150.0
    tol: float = 1e-12
    s_max: float | None = None
    t1: float = 10.0
    t2: float = 120.0
    envelope_width: float = 6.0
    output_dir: str = "out"

    def validate(self):
        pos = ["alpha", "L", "dx", "T", "dt", "sample_stride", "k_min",
               "k_max", "epsilon0", "horizon", "tol", "t1", "t2",
               "envelope_width"]
        for name in pos:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.alpha <= 1.0:
            raise ConfigError("alpha must exceed 1")
        if self.dt > 0.9 * self.dx:
            raise ConfigError("CFL violation: need dt <= 0.9 dx")
        if self.L < self.T + 20.0:
            raise ConfigError("light-cone violation: need L >= T + 20 so "
                              "boundary reflections stay outside the run")
        if self.L < self.horizon + 20.0:
            raise ConfigError("light-cone violation: need L >= horizon + 20")
        if self.k_min >= self.k_max:
            raise ConfigError("need k_min < k_max")
        if self.n_log < 3 or self.n_lin < 3:
            raise ConfigError("k grid needs at least 3 points per segment")
        if self.t2 <= self.t1:
            raise ConfigError("fit window degenerate: need t1 < t2")
        if self.t2 > self.T:
            raise ConfigError("fit window must lie inside the run")
        if self.zeta_shape not in ("gaussian", "compact_bump", "custom_file"):
            raise ConfigError(f"unknown zeta_shape {self.zeta_shape!r}")
        if self.zeta_shape == "custom_file" and not self.zeta_file:
            raise ConfigError("zeta_shape custom_file needs zeta_file")
        if abs(self.b) >= 0.1 * self.epsilon0:
            raise ConfigError("b alone exceeds the smallness budget")
        return self


_SCHEMA = {
    "model": {"alpha": "alpha"},
    "grid": {"L": "L", "dx": "dx"},
    "time": {"T": "T", "dt": "dt", "sample_stride": "sample_stride"},
    "k_grid": {"k_min": "k_min", "k_max": "k_max",
               "n_log": "n_log", "n_lin": "n_lin"},
    "data": {"b": "b", "zeta_shape": "zeta_shape",
             "zeta_amplitude": "zeta_amplitude", "zeta_file": "zeta_file",
             "epsilon0": "epsilon0"},
    "shoot": {"horizon": "horizon", "tol": "tol", "s_max": "s_max"},
    "fit": {"t1": "t1", "t2": "t2", "envelope_width": "envelope_width"},
    "output": {"dir": "output_dir"},
}

_TYPES = {f.name: f.type for f in fields(Config)}


def load_config(path: str | None) -> Config:
    """Read and validate a config file; None gives validated defaults."""
    cfg = Config()
    if path is None:
        return cfg.validate()
    parser = configparser.ConfigParser()
    parser.optionxform = str          # keys are case-sensitive (L vs l)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            attr = _SCHEMA[section][key]
            try:
                setattr(cfg, attr, _coerce(attr, raw))
            except ValueError as exc:
                raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
    return cfg.validate()


def _coerce(attr: str, raw: str):
    raw = raw.strip()
    kind = _TYPES[attr]
    if attr == "s_max":
        return None if raw in ("", "auto", "none") else float(raw)
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def config_dict(cfg: Config) -> dict:
    out = {}
    for section, keys in _SCHEMA.items():
        out[section] = {k: getattr(cfg, attr) for k, attr in keys.items()}
    return out


def zeta_shape(cfg: Config, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw (zeta1, zeta2) shapes before projection and budget normalization."""
    if cfg.zeta_shape == "gaussian":
        z1 = cfg.zeta_amplitude * (4.0 * np.exp(-((x / 2.0) ** 2))
                                   + np.exp(-((x / 8.0) ** 2)))
        z2 = np.zeros_like(x)
    elif cfg.zeta_shape == "compact_bump":
        s = 3.0
        z1 = np.zeros_like(x)
        core = np.abs(x) < s
        z1[core] = cfg.zeta_amplitude * np.exp(-1.0 / (1.0 - (x[core] / s) ** 2))
        z2 = np.zeros_like(x)
    else:
        arr = np.load(cfg.zeta_file)
        z1 = np.asarray(arr["zeta1"], dtype=float)
        z2 = np.asarray(arr["zeta2"], dtype=float)
        if z1.shape != x.shape or z2.shape != x.shape:
            raise ConfigError("custom zeta arrays must match the grid")
    return z1, z2


def build_data(cfg: Config, disc, basis=None):
    """DataSpec from the config: shape, bound-state projection, and budget
    normalization so the transverse size equals the allowed fraction of
    epsilon0.  Without a basis the cheap weighted-L2 surrogate is used."""
    from .manifold import (BUDGET_FRACTION, DataSpec, normalize_budget,
                           transverse_norm)
    z1, z2 = zeta_shape(cfg, disc.x)
    z1 = z1 - disc.ip(z1, disc.rho) * disc.rho
    z2 = z2 - disc.ip(z2, disc.rho) * disc.rho
    spec = DataSpec(cfg.b, z1, z2, cfg.epsilon0)
    if basis is not None:
        return normalize_budget(spec, basis)
    target = BUDGET_FRACTION * cfg.epsilon0
    raw = transverse_norm(DataSpec(0.0, z1, z2, cfg.epsilon0), disc)
    scale = (target - abs(cfg.b)) / raw if raw > 0 else 0.0
    return DataSpec(cfg.b, scale * z1, scale * z2, cfg.epsilon0)
