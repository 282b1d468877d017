"""
Symbols for the three operator families.

  TreeSymbol        Ψ(x, z)  on vertices × strip
  MultiplierSymbol  m(z)     (vertex independent)
  ZSymbol           ψ(l, s)  on ℤ × 𝕋

Every symbol evaluates vectorised over the spectral variable, exposes
derivatives up to order 2 (analytic where known, central differences with
step 1e-5 otherwise) and declares the halfwidth of the strip on which it is
holomorphic.  Implementations hold no mutable state.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from treeharm import tree_core
from treeharm.errors import InvalidParameterError, StripTooNarrowError, SymbolDomainError
from treeharm.spectral import TorusGrid
from treeharm.tree_core import TreeParams, Vertex

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
ENTIRE = math.inf
POLE_SLACK = 1e-12
NEAR_BOUNDARY = 0.99


def _finite_difference(fn: Callable, z, k: int, h: float = FD_STEP):
    if k == 0:
        return fn(z)
    if k == 1:
        return (fn(z + h) - fn(z - h)) / (2.0 * h)
    if k == 2:
        return (fn(z + h) - 2.0 * fn(z) + fn(z - h)) / (h * h)
    raise InvalidParameterError(f"derivative order must be 0, 1 or 2, got {k}")


def _check_order(k: int):
    if k not in (0, 1, 2):
        raise InvalidParameterError(f"derivative order must be 0, 1 or 2, got {k}")


# ── Multipliers ─────────────────────────────────────────────────────

class MultiplierSymbol(ABC):
    symbol_id: str = "multiplier"
    strip_halfwidth: float = ENTIRE
    bandwidth: int | None = None

    @abstractmethod
    def eval(self, z):
        """m(z)."""

    def derivative(self, z, k: int):
        _check_order(k)
        return _finite_difference(self.eval, z, k)

    def __call__(self, z):
        return self.eval(z)


class TrigMultiplier(MultiplierSymbol):
    """m(z) = Σ_k a_k cos(k z log q)."""

    def __init__(self, coeffs: Sequence[complex], params: TreeParams, symbol_id: str | None = None):
        if len(coeffs) == 0:
            raise InvalidParameterError("trig multiplier needs at least one coefficient")
        self.coeffs = np.array(coeffs, dtype=complex)
        self.params = params
        self.bandwidth = len(coeffs) - 1
        self.symbol_id = symbol_id or "trig:" + ",".join(f"{c.real:g}" for c in self.coeffs)

    def derivative(self, z, k: int):
        _check_order(k)
        z = np.asarray(z, dtype=complex)
        L = self.params.log_q
        out = np.zeros(z.shape, dtype=complex)
        for j, a in enumerate(self.coeffs):
            w = j * L
            if k == 0:
                out = out + a * np.cos(w * z)
            elif k == 1:
                out = out - a * w * np.sin(w * z)
            else:
                out = out - a * w * w * np.cos(w * z)
        return out if out.ndim else complex(out)

    def eval(self, z):
        return self.derivative(z, 0)


class PoleMultiplier(MultiplierSymbol):
    """m(z) = 1/(α − cos(z log q)); holomorphic on |Im z| < arccosh(α)/log q.

    Evaluation on or beyond the first pole line raises SymbolDomainError.
    """

    def __init__(self, alpha: float, params: TreeParams, symbol_id: str | None = None,
                 halfwidth: float | None = None):
        if not alpha > 1.0:
            raise InvalidParameterError(f"pole multiplier needs alpha > 1, got {alpha}")
        self.alpha = float(alpha)
        self.params = params
        # acosh(cosh(h)) != h in floating point
        self.strip_halfwidth = float(halfwidth) if halfwidth is not None else math.acosh(self.alpha) / params.log_q
        self.symbol_id = symbol_id or f"pole:{self.alpha:.17g}"

    def _guard(self, z: np.ndarray):
        hw = self.strip_halfwidth
        top = float(np.max(np.abs(z.imag))) if z.size else 0.0
        if top >= hw * (1.0 - POLE_SLACK):
            raise SymbolDomainError(
                f"{self.symbol_id} evaluated at |Im z| >= its holomorphy halfwidth {hw:.6g}"
            )
        if top >= hw * NEAR_BOUNDARY:
            logger.warning("%s evaluated at |Im z| = %.6g, within %.0f%% of its pole line %.6g",
                           self.symbol_id, top, 100 * (1 - NEAR_BOUNDARY), hw)

    def derivative(self, z, k: int):
        _check_order(k)
        z = np.asarray(z, dtype=complex)
        self._guard(z)
        L = self.params.log_q
        g = 1.0 / (self.alpha - np.cos(L * z))
        if k == 0:
            out = g
        elif k == 1:
            out = -L * np.sin(L * z) * g * g
        else:
            out = L * L * g * g * (2.0 * np.sin(L * z) ** 2 * g - np.cos(L * z))
        return out if out.ndim else complex(out)

    def eval(self, z):
        return self.derivative(z, 0)


class CallableMultiplier(MultiplierSymbol):
    """Wraps a user function; derivatives by central differences unless supplied."""

    def __init__(self, fn: Callable, strip_halfwidth: float = ENTIRE, symbol_id: str = "callable",
                 derivatives: dict[int, Callable] | None = None, bandwidth: int | None = None):
        self.fn = fn
        self.strip_halfwidth = strip_halfwidth
        self.symbol_id = symbol_id
        self.derivatives = dict(derivatives or {})
        self.bandwidth = bandwidth

    def eval(self, z):
        return self.fn(z)

    def derivative(self, z, k: int):
        _check_order(k)
        if k in self.derivatives:
            return self.derivatives[k](z)
        return _finite_difference(self.fn, z, k)


def trig_multiplier(coeffs: Sequence[complex], params: TreeParams) -> TrigMultiplier:
    return TrigMultiplier(coeffs, params)


def pole_multiplier(alpha: float, params: TreeParams) -> PoleMultiplier:
    return PoleMultiplier(alpha, params)


def pole_multiplier_for_halfwidth(halfwidth: float, params: TreeParams) -> PoleMultiplier:
    """Pole multiplier whose holomorphy strip has the given halfwidth."""
    if halfwidth <= 0:
        raise InvalidParameterError(f"halfwidth must be > 0, got {halfwidth}")
    return PoleMultiplier(math.cosh(halfwidth * params.log_q), params,
                          symbol_id=f"pole-halfwidth:{halfwidth:g}", halfwidth=halfwidth)


# ── Tree symbols ────────────────────────────────────────────────────

class TreeSymbol(ABC):
    symbol_id: str = "symbol"
    strip_halfwidth: float = ENTIRE
    is_multiplier: bool = False

    @abstractmethod
    def eval(self, x: Vertex, z):
        """Ψ(x, z)."""

    def derivative(self, x: Vertex, z, k: int):
        _check_order(k)
        return _finite_difference(lambda w: self.eval(x, w), z, k)

    @property
    def bandwidth(self) -> int | None:
        return None


# Bounded vertex factors u(x) usable in product symbols.
VERTEX_FACTORS: dict[str, Callable[[Vertex], float]] = {
    "one": lambda x: 1.0,
    "parity": lambda x: 1.0 + (-1.0) ** x.depth / 2.0,
    "decay": lambda x: 1.0 / (1.0 + x.depth),
}


class ProductSymbol(TreeSymbol):
    """Ψ(x, z) = u(x) · m(z)."""

    def __init__(self, u: Callable[[Vertex], complex], m: MultiplierSymbol, u_id: str = "u"):
        self.u = u
        self.m = m
        self.u_id = u_id
        self.strip_halfwidth = m.strip_halfwidth
        self.is_multiplier = u_id == "one"
        self.symbol_id = m.symbol_id if self.is_multiplier else f"{u_id}*{m.symbol_id}"

    def eval(self, x: Vertex, z):
        return self.u(x) * self.m.eval(z)

    def derivative(self, x: Vertex, z, k: int):
        _check_order(k)
        return self.u(x) * self.m.derivative(z, k)

    @property
    def bandwidth(self) -> int | None:
        return self.m.bandwidth


class CallableTreeSymbol(TreeSymbol):
    def __init__(self, fn: Callable[[Vertex, object], object], strip_halfwidth: float = ENTIRE,
                 symbol_id: str = "callable"):
        self.fn = fn
        self.strip_halfwidth = strip_halfwidth
        self.symbol_id = symbol_id

    def eval(self, x: Vertex, z):
        return self.fn(x, z)


def product_symbol(u: Callable[[Vertex], complex] | str, m: MultiplierSymbol) -> ProductSymbol:
    if isinstance(u, str):
        if u not in VERTEX_FACTORS:
            raise InvalidParameterError(f"unknown vertex factor {u!r}; known: {sorted(VERTEX_FACTORS)}")
        return ProductSymbol(VERTEX_FACTORS[u], m, u_id=u)
    return ProductSymbol(u, m)


def as_tree_symbol(sym: TreeSymbol | MultiplierSymbol) -> TreeSymbol:
    if isinstance(sym, TreeSymbol):
        return sym
    if isinstance(sym, MultiplierSymbol):
        return ProductSymbol(VERTEX_FACTORS["one"], sym, u_id="one")
    raise InvalidParameterError(f"not a symbol: {sym!r}")


def holomorphy_halfwidth(sym) -> float:
    return sym.strip_halfwidth


def require_strip(sym, delta: float):
    """Raise StripTooNarrowError unless the symbol is holomorphic beyond Im z = ±delta."""
    if delta > 0 and not sym.strip_halfwidth > delta:
        raise StripTooNarrowError(
            f"symbol {sym.symbol_id} has strip halfwidth {sym.strip_halfwidth:.6g}, "
            f"contour needs {delta:.6g}"
        )
    if delta > 0 and sym.strip_halfwidth * NEAR_BOUNDARY <= delta:
        logger.warning("symbol %s: strip halfwidth %.6g is within 1%% of the contour shift %.6g",
                       sym.symbol_id, sym.strip_halfwidth, delta)


# ── Parsing ─────────────────────────────────────────────────────────

def _parse_multiplier(spec: str, params: TreeParams) -> MultiplierSymbol:
    kind, _, args = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "one":
            return TrigMultiplier([1.0], params, symbol_id="one")
        if kind == "trig":
            coeffs = [float(a) for a in args.split(",") if a.strip()]
            return TrigMultiplier(coeffs, params, symbol_id=spec.strip())
        if kind == "pole":
            return PoleMultiplier(float(args), params, symbol_id=spec.strip())
        if kind == "pole-halfwidth":
            h = float(args)
            if h <= 0:
                raise InvalidParameterError(f"halfwidth must be > 0, got {h}")
            return PoleMultiplier(math.cosh(h * params.log_q), params, symbol_id=spec.strip(), halfwidth=h)
    except ValueError as exc:
        raise InvalidParameterError(f"cannot parse symbol arguments in {spec!r}: {exc}") from exc
    raise InvalidParameterError(f"unknown symbol kind {kind!r} in {spec!r}")


def parse_symbol(spec: str, params: TreeParams) -> TreeSymbol:
    """Build a symbol from its id string.

    Grammar: ``one`` | ``trig:a0,a1,...`` | ``pole:alpha`` | ``pole-halfwidth:h``
    | ``<u>*<multiplier>`` with u in {one, parity, decay}.
    """
    spec = spec.strip()
    if "*" in spec:
        u_id, _, rest = spec.partition("*")
        sym = product_symbol(u_id.strip().lower(), _parse_multiplier(rest, params))
        sym.symbol_id = spec
        return sym
    return as_tree_symbol(_parse_multiplier(spec, params))


# ── Checks ──────────────────────────────────────────────────────────

@dataclass(frozen=True)
class WeylReport:
    max_even_defect: float
    max_period_defect: float
    passed: bool


def _safe_eval(fn: Callable, z, symbol_id: str) -> np.ndarray:
    try:
        val = np.asarray(fn(z), dtype=complex)
    except SymbolDomainError:
        raise
    except (ArithmeticError, ValueError) as exc:
        raise SymbolDomainError(f"{symbol_id} failed to evaluate: {exc}") from exc
    if not np.all(np.isfinite(val)):
        raise SymbolDomainError(f"{symbol_id} returned non-finite values inside its strip")
    return val


def sample_strip(halfwidth: float, n_samples: int, params: TreeParams, seed: int = 0) -> np.ndarray:
    """Strip samples with |Im z| at most 90% of min(halfwidth, 1/2); the first sample is τ/4."""
    rng = np.random.default_rng(seed)
    h = 0.9 * min(halfwidth, 0.5)
    s = rng.uniform(-params.tau / 2, params.tau / 2, n_samples)
    v = rng.uniform(-h, h, n_samples)
    z = s + 1j * v
    if n_samples:
        z[0] = params.tau / 4
    return z


def check_weyl_invariance(sym: TreeSymbol | MultiplierSymbol, params: TreeParams, n_samples: int = 200,
                          tol: float = 1e-12, seed: int = 0,
                          vertices: Sequence[Vertex] | None = None) -> WeylReport:
    """Largest |Ψ(x, z) − Ψ(x, −z)| and |Ψ(x, z) − Ψ(x, z + τ)| over the samples.

    The defects are absolute.  ``passed`` compares each one with
    tol · max(1, |Ψ(x, z)|) at its own sample.
    """
    z = sample_strip(sym.strip_halfwidth, n_samples, params, seed)
    if isinstance(sym, MultiplierSymbol):
        fns = [sym.eval]
    else:
        verts = vertices if vertices is not None else tree_core.ball(2, params)
        fns = [lambda w, x=x: sym.eval(x, w) for x in verts]

    even = period = 0.0
    passed = True
    for fn in fns:
        base = _safe_eval(fn, z, sym.symbol_id)
        scale = np.maximum(1.0, np.abs(base))
        even_d = np.abs(base - _safe_eval(fn, -z, sym.symbol_id))
        period_d = np.abs(base - _safe_eval(fn, z + params.tau, sym.symbol_id))
        even = max(even, float(np.max(even_d)))
        period = max(period, float(np.max(period_d)))
        passed = passed and bool(np.all(even_d < tol * scale) and np.all(period_d < tol * scale))
    logger.debug("weyl check %s: even=%.3g period=%.3g", sym.symbol_id, even, period)
    return WeylReport(even, period, passed)


def cv_seminorm(sym: TreeSymbol | MultiplierSymbol, x_set: Sequence[Vertex], s_grid, v: float = 0.0) -> float:
    """Sampled sup over x, s and k ≤ 2 of |d^k/dz^k Ψ(x, s + iv)| (a lower estimate)."""
    sym = as_tree_symbol(sym)
    if abs(v) >= sym.strip_halfwidth:
        raise SymbolDomainError(
            f"shift {v} is outside the holomorphy strip of {sym.symbol_id} "
            f"(halfwidth {sym.strip_halfwidth:.6g})"
        )
    nodes = s_grid.nodes if isinstance(s_grid, TorusGrid) else np.asarray(s_grid, dtype=float)
    z = nodes + 1j * v
    best = 0.0
    for x in x_set:
        for k in (0, 1, 2):
            vals = _safe_eval(lambda w: sym.derivative(x, w, k), z, sym.symbol_id)
            best = max(best, float(np.max(np.abs(vals))))
    return best


# ── Symbols on ℤ ────────────────────────────────────────────────────

class ZSymbol(ABC):
    symbol_id: str = "zsymbol"
    bandwidth: int | None = None

    @abstractmethod
    def eval(self, l: int, s):
        """ψ(l, s)."""

    def derivative(self, l: int, s, k: int):
        _check_order(k)
        return _finite_difference(lambda w: self.eval(l, w), s, k)


class ZMultiplier(ZSymbol):
    """ψ(l, s) = m(s + i·shift)."""

    def __init__(self, m: MultiplierSymbol, shift: float = 0.0):
        self.m = m
        self.shift = shift
        self.bandwidth = m.bandwidth
        self.symbol_id = m.symbol_id if shift == 0 else f"{m.symbol_id}@{shift:+.6g}i"

    def eval(self, l: int, s):
        return self.m.eval(np.asarray(s) + 1j * self.shift)

    def derivative(self, l: int, s, k: int):
        return self.m.derivative(np.asarray(s) + 1j * self.shift, k)


class ZProduct(ZSymbol):
    """ψ(l, s) = u(l) · m(s)."""

    def __init__(self, u: Callable[[int], complex], m: MultiplierSymbol, u_id: str = "u"):
        self.u = u
        self.m = m
        self.bandwidth = m.bandwidth
        self.symbol_id = f"{u_id}*{m.symbol_id}"

    def eval(self, l: int, s):
        return self.u(l) * self.m.eval(s)

    def derivative(self, l: int, s, k: int):
        return self.u(l) * self.m.derivative(s, k)


class CallableZSymbol(ZSymbol):
    def __init__(self, fn: Callable[[int, object], object], symbol_id: str = "callable",
                 bandwidth: int | None = None):
        self.fn = fn
        self.symbol_id = symbol_id
        self.bandwidth = bandwidth

    def eval(self, l: int, s):
        return self.fn(l, s)


class InducedZSymbol(ZSymbol):
    """ψ(l, s) = Ψ(ω₀_l, s + i·shift) along the distinguished geodesic."""

    def __init__(self, sym: TreeSymbol, shift: float, params: TreeParams):
        self.sym = as_tree_symbol(sym)
        self.shift = shift
        self.params = params
        self.bandwidth = self.sym.bandwidth
        self.symbol_id = f"{self.sym.symbol_id}@{shift:+.6g}i"

    def eval(self, l: int, s):
        return self.sym.eval(tree_core.geodesic_vertex(l, self.params), np.asarray(s) + 1j * self.shift)

    def derivative(self, l: int, s, k: int):
        return self.sym.derivative(tree_core.geodesic_vertex(l, self.params), np.asarray(s) + 1j * self.shift, k)


def constant_z_symbol(value: complex = 1.0) -> CallableZSymbol:
    return CallableZSymbol(lambda l, s: value * np.ones_like(np.asarray(s, dtype=complex)),
                           symbol_id="one" if value == 1.0 else f"const:{value}", bandwidth=0)


def z_multiplier(m: MultiplierSymbol, shift: float = 0.0) -> ZMultiplier:
    return ZMultiplier(m, shift)


def z_product(u: Callable[[int], complex], m: MultiplierSymbol, u_id: str = "u") -> ZProduct:
    return ZProduct(u, m, u_id)


def induced_z_symbol(sym: TreeSymbol | MultiplierSymbol, shift: float, params: TreeParams) -> InducedZSymbol:
    sym = as_tree_symbol(sym)
    if abs(shift) > 0:
        require_strip(sym, abs(shift))
    return InducedZSymbol(sym, shift, params)
