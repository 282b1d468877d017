"""
Run configuration: built-in defaults, flat ``key = value`` files and
command-line overrides, validated into a RunConfig.

Precedence is flags > file > defaults.
"""

from __future__ import annotations

import logging
import math
import os
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from treeharm.errors import ConfigError, TreeHarmError
from treeharm.symbols import parse_symbol
from treeharm.tree_core import TreeParams

logger = logging.getLogger(__name__)

DEFAULTS: dict[str, Any] = {
    "q": 2,
    "p": 1.5,
    "radius": 3,
    "window": 16,
    "nodes": 512,
    "depth": None,
    "symbol": "one",
    "seed": 20240101,
    "tol": 1e-8,
    "out": None,
    "max_iters": 500,
    "radii": "1,2,3,4,5",
    "ps": None,
    "z_values": "0",
    "d_max": None,
    "plot": False,
    "timing": False,
}


def _key(raw: str) -> str:
    return raw.strip().lower().replace("-", "_")


def load(path: str) -> dict:
    """Parse a flat key=value file; ``#`` starts a comment."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    cfg: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
            key, value = line.split("=", 1)
            cfg[_key(key)] = value.strip()
    logger.debug("loaded %d keys from %s", len(cfg), path)
    return cfg


def merge(defaults: dict, file_cfg: dict | None, overrides: dict | None) -> dict:
    """Flags win over the file, the file wins over defaults; None flags are ignored."""
    merged = dict(defaults)
    merged.update(file_cfg or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return merged


def _float_list(raw) -> list[float]:
    if isinstance(raw, (list, tuple)):
        return [float(v) for v in raw]
    return [float(v) for v in str(raw).split(",") if v.strip()]


def _complex_list(raw: str) -> list[complex]:
    return [complex(s.strip().replace(" ", "")) for s in raw.split(",") if s.strip()]


class RunConfig(BaseModel):
    """Validated settings shared by every experiment command."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    q: int = DEFAULTS["q"]
    p: float = DEFAULTS["p"]
    radius: int = DEFAULTS["radius"]
    window: int = DEFAULTS["window"]
    nodes: int = DEFAULTS["nodes"]
    depth: Optional[int] = None
    symbol: str = DEFAULTS["symbol"]
    seed: int = DEFAULTS["seed"]
    tol: float = DEFAULTS["tol"]
    out: Optional[str] = None
    max_iters: int = DEFAULTS["max_iters"]
    radii: list[int] = [1, 2, 3, 4, 5]
    ps: Optional[list[float]] = None
    z_values: str = DEFAULTS["z_values"]
    d_max: Optional[int] = None
    plot: bool = False
    timing: bool = False

    @field_validator("q")
    @classmethod
    def _q(cls, v: int) -> int:
        if v < 2:
            raise ValueError(f"q must be >= 2, got {v}")
        return v

    @field_validator("p")
    @classmethod
    def _p(cls, v: float) -> float:
        if not (1.0 < v < math.inf):
            raise ValueError(f"p must lie in (1, inf), got {v}")
        return v

    @field_validator("nodes")
    @classmethod
    def _nodes(cls, v: int) -> int:
        if v < 4 or v % 2:
            raise ValueError(f"nodes must be an even integer >= 4, got {v}")
        return v

    @field_validator("radius", "window", "max_iters")
    @classmethod
    def _non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"must be >= 0, got {v}")
        return v

    @field_validator("tol")
    @classmethod
    def _tol(cls, v: float) -> float:
        if not v >= 0:
            raise ValueError(f"tol must be >= 0, got {v}")
        return v

    @field_validator("radii", mode="before")
    @classmethod
    def _radii(cls, v):
        raw = _float_list(v)
        if any(not r.is_integer() for r in raw):
            raise ValueError(f"radii must be integers, got {v!r}")
        vals = [int(r) for r in raw]
        if not vals or min(vals) < 0:
            raise ValueError(f"radii must be a non-empty list of integers >= 0, got {v!r}")
        return vals

    @field_validator("ps", mode="before")
    @classmethod
    def _ps(cls, v):
        if v is None or v == "":
            return None
        vals = _float_list(v)
        for p in vals:
            if not (1.0 < p < math.inf):
                raise ValueError(f"every p must lie in (1, inf), got {p}")
        return vals

    @field_validator("z_values", mode="before")
    @classmethod
    def _z_values(cls, v):
        if isinstance(v, (list, tuple)):
            v = ",".join(str(s) for s in v)
        v = str(v)
        try:
            _complex_list(v)
        except ValueError as exc:
            raise ValueError(f"cannot parse z values {v!r}: {exc}") from exc
        return v

    @field_validator("plot", "timing", mode="before")
    @classmethod
    def _flag(cls, v):
        if isinstance(v, str):
            return v.strip().lower() in ("1", "true", "yes", "on")
        return bool(v)

    @model_validator(mode="after")
    def _cross_checks(self):
        if self.depth is not None and self.depth < self.radius:
            raise ValueError(f"depth {self.depth} must be >= radius {self.radius}")
        if self.d_max is not None and self.d_max < 0:
            raise ValueError(f"d_max must be >= 0, got {self.d_max}")
        try:
            parse_symbol(self.symbol, TreeParams(self.q))
        except TreeHarmError as exc:
            raise ValueError(str(exc)) from exc
        return self

    # ── Derived values ──

    @property
    def params(self) -> TreeParams:
        return TreeParams(self.q)

    @property
    def cylinder_depth(self) -> int:
        return max(self.radius, 1) if self.depth is None else self.depth

    @property
    def spectral_points(self) -> list[complex]:
        return _complex_list(self.z_values)

    @property
    def exponents(self) -> list[float]:
        return self.ps if self.ps else [self.p]

    def header(self, *keys: str) -> dict:
        return {k: getattr(self, k) for k in keys}


def build(file_path: str | None, overrides: dict) -> RunConfig:
    """Merge defaults, an optional config file and flags into a RunConfig.

    Raises ConfigError with every validation message on one line.
    """
    file_cfg = load(file_path) if file_path else {}
    merged = merge(DEFAULTS, file_cfg, overrides)
    try:
        return RunConfig(**merged)
    except ValidationError as exc:
        msgs = "; ".join(f"{'.'.join(str(p) for p in e['loc']) or 'config'}: {e['msg']}" for e in exc.errors())
        raise ConfigError(f"invalid configuration: {msgs}") from None
