"""Run configuration read from JSON, with every field defaulted."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields

from .branch import DEFAULT_A_MAX, DEFAULT_TOL
from .verify import TAIL_WINDOWS, TOLERANCES

ENV_VAR = "BN_CONFIG"


class ConfigError(ValueError):
    pass


def _per_dim(d: dict) -> dict:
    return {str(k): v for k, v in d.items()}


@dataclass
class Config:
    solver_tol: dict = field(default_factory=lambda: _per_dim(DEFAULT_TOL))
    a_min: float = 1e-2
    a_max: dict = field(default_factory=lambda: _per_dim(DEFAULT_A_MAX))
    per_decade: int = 40
    tail_windows: dict = field(default_factory=lambda: _per_dim({k: list(v) for k, v in TAIL_WINDOWS.items()}))
    report_tolerances: dict = field(default_factory=lambda: _per_dim(
        {k: dict(v) if isinstance(v, dict) else v for k, v in TOLERANCES.items()}))
    critical_tol: float = 1e-12
    ansatz_per_decade: int = 200

    def __post_init__(self):
        self._validate()

    def _validate(self):
        dims = {"3", "4", "5", "6"}
        for name in ("solver_tol", "a_max", "tail_windows"):
            d = getattr(self, name)
            if not isinstance(d, dict) or set(d) - dims:
                raise ConfigError(f"{name} must map dimensions 3..6 to values")
        for k, v in self.solver_tol.items():
            if not (isinstance(v, (int, float)) and 0 < v < 1e-3):
                raise ConfigError(f"solver_tol[{k}] must lie in (0, 1e-3)")
        for k, v in self.a_max.items():
            if not (isinstance(v, (int, float)) and v > self.a_min):
                raise ConfigError(f"a_max[{k}] must exceed a_min")
        for k, v in self.tail_windows.items():
            if not (isinstance(v, (list, tuple)) and len(v) == 2 and 0 < v[0] < v[1]):
                raise ConfigError(f"tail_windows[{k}] must be [lo, hi] with 0 < lo < hi")
        if not self.a_min > 0:
            raise ConfigError("a_min must be positive")
        if not (isinstance(self.per_decade, int) and self.per_decade > 0):
            raise ConfigError("per_decade must be a positive integer")
        if not (isinstance(self.ansatz_per_decade, int) and self.ansatz_per_decade > 0):
            raise ConfigError("ansatz_per_decade must be a positive integer")
        if not 0 < self.critical_tol < 1e-3:
            raise ConfigError("critical_tol must lie in (0, 1e-3)")
        allowed = dims | {"trend"}
        if set(self.report_tolerances) - allowed:
            raise ConfigError("report_tolerances keys must be 3..6 or 'trend'")

    def tol(self, N: int) -> float:
        return float(self.solver_tol[str(N)])

    def window(self, N: int) -> tuple[float, float]:
        lo, hi = self.tail_windows[str(N)]
        return float(lo), float(hi)

    def tolerances(self) -> dict:
        out = {}
        for k, v in self.report_tolerances.items():
            out["trend" if k == "trend" else int(k)] = v
        return out


def from_dict(data: dict) -> Config:
    known = {f.name for f in fields(Config)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
    base = Config()
    merged = {}
    for name in known:
        if name not in data:
            continue
        cur, new = getattr(base, name), data[name]
        if isinstance(cur, dict):
            if not isinstance(new, dict):
                raise ConfigError(f"{name} must be an object")
            upd = dict(cur)
            for k, v in new.items():
                if isinstance(upd.get(str(k)), dict) and isinstance(v, dict):
                    unknown = set(v) - set(upd[str(k)])
                    if unknown:
                        raise ConfigError(f"unknown keys in {name}[{k}]: {', '.join(sorted(unknown))}")
                    upd[str(k)] = {**upd[str(k)], **v}
                else:
                    upd[str(k)] = v
            merged[name] = upd
        else:
            merged[name] = new
    return Config(**merged)


def load(path: str | None = None) -> Config:
    """Config from ``path``, else from $BN_CONFIG, else defaults.

    The environment variable takes precedence over ``path``.
    """
    path = os.environ.get(ENV_VAR) or path
    if not path:
        return Config()
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return from_dict(data)
