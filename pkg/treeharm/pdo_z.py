"""
Pseudo-differential operators on the lattice ℤ.

    T_ψ f(l) = (1/τ) ∫_𝕋 ψ(l, s) Ff(s) q^{ils} ds = Σ_d f(d) κ(l, l − d)
    κ(l, k)  = (1/τ) ∫_𝕋 ψ(l, s) q^{isk} ds

Both integrals are taken with the midpoint rule, which is exact for
trigonometric polynomials of bandwidth below N/2.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from treeharm import csv_io
from treeharm.errors import InvalidParameterError, SymbolDomainError
from treeharm.parallel import map_ordered
from treeharm.spectral import TorusGrid, torus_grid
from treeharm.symbols import ZSymbol
from treeharm.transforms import ZFunction, z_fourier
from treeharm.tree_core import TreeParams

logger = logging.getLogger(__name__)


def required_nodes(bandwidth: int | None, window: int | None = None, minimum: int = 4) -> int:
    """Smallest even N with N ≥ 4·(bandwidth + 1) and, for a window [−L, L],
    N ≥ 2·(2L + bandwidth + 1).

    Sections need offsets |k| up to 2L, and the midpoint sum for κ(l, k) aliases
    once |k| + bandwidth reaches N.  Without a declared bandwidth only the window
    bound applies.
    """
    n = minimum
    if bandwidth is not None:
        n = max(n, 4 * (int(bandwidth) + 1))
    if window is not None:
        n = max(n, 2 * (2 * int(window) + int(bandwidth or 0) + 1))
    return n + n % 2


def grid_for(sym, n_nodes: int, params: TreeParams, window: int | None = None) -> TorusGrid:
    """The configured grid, refined when the bandwidth or the window needs more nodes."""
    need = required_nodes(getattr(sym, "bandwidth", None), window)
    if need > n_nodes:
        logger.debug("%s: refining N=%d to %d (window %s)", sym.symbol_id, n_nodes, need, window)
    return torus_grid(max(n_nodes, need), params)


def _symbol_row(sym: ZSymbol, l: int, s: np.ndarray) -> np.ndarray:
    vals = np.asarray(sym.eval(l, s), dtype=complex) * np.ones(s.shape)
    if not np.all(np.isfinite(vals)):
        raise SymbolDomainError(f"{sym.symbol_id} returned non-finite values at l={l}")
    return vals


# ── Kernel ──────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class ZKernel:
    """κ(l, k) of a lattice symbol on a fixed grid."""

    symbol: ZSymbol
    grid: TorusGrid
    params: TreeParams

    def row(self, l: int, ks) -> np.ndarray:
        ks = np.asarray(ks)
        vals = _symbol_row(self.symbol, l, self.grid.nodes)
        waves = np.exp(1j * ks[:, None] * self.grid.nodes[None, :] * self.params.log_q)
        return waves @ vals * (self.grid.weight / self.grid.tau)

    def __call__(self, l: int, k: int) -> complex:
        return complex(self.row(l, [k])[0])


def z_kernel(sym: ZSymbol, l: int, k: int, grid: TorusGrid, params: TreeParams) -> complex:
    return ZKernel(sym, grid, params)(l, k)


# ── Operators ───────────────────────────────────────────────────────

def _window(f: ZFunction, window: tuple[int, int] | None) -> tuple[int, int]:
    lo, hi = window or f.support
    if hi < lo:
        raise InvalidParameterError(f"empty output window [{lo}, {hi}]")
    return lo, hi


def apply_zpdo(sym: ZSymbol, f: ZFunction, grid: TorusGrid, params: TreeParams,
               window: tuple[int, int] | None = None) -> ZFunction:
    """Σ_d f(d) κ(l, l − d) for l in the window (default: the support of f)."""
    lo, hi = _window(f, window)
    kernel = ZKernel(sym, grid, params)
    out = [kernel.row(l, l - f.points) @ f.values for l in range(lo, hi + 1)]
    return ZFunction(lo, np.array(out, dtype=complex))


def apply_zpdo_quadrature(sym: ZSymbol, f: ZFunction, grid: TorusGrid, params: TreeParams,
                          window: tuple[int, int] | None = None) -> ZFunction:
    """(1/τ) Σ_k w ψ(l, s_k) Ff(s_k) q^{i l s_k}; agrees with apply_zpdo."""
    lo, hi = _window(f, window)
    Ff = z_fourier(f, grid.nodes, params)
    out = []
    for l in range(lo, hi + 1):
        vals = _symbol_row(sym, l, grid.nodes)
        waves = np.exp(1j * l * grid.nodes * params.log_q)
        out.append(np.sum(vals * Ff * waves) * (grid.weight / grid.tau))
    return ZFunction(lo, np.array(out, dtype=complex))


# ── Finite sections ─────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class ZSection:
    """M(l, d) = κ(l, l − d) for l, d in [−L, L]."""

    window: int
    matrix: np.ndarray = field(repr=False)
    grid: TorusGrid = field(repr=False)
    params: TreeParams = field(repr=False)
    symbol_id: str = ""

    @property
    def points(self) -> np.ndarray:
        return np.arange(-self.window, self.window + 1)

    def toeplitz_spread(self) -> float:
        """Largest spread along a diagonal (0 for multipliers)."""
        n = self.matrix.shape[0]
        spread = 0.0
        for k in range(-n + 1, n):
            diag = np.diagonal(self.matrix, offset=k)
            spread = max(spread, float(np.max(np.abs(diag - diag[0]))))
        return spread


def finite_section(sym: ZSymbol, L: int, grid: TorusGrid, params: TreeParams,
                   threads: int | None = None) -> ZSection:
    if L < 0:
        raise InvalidParameterError(f"window half-length must be >= 0, got {L}")
    grid = grid_for(sym, grid.n_nodes, params, window=L)
    kernel = ZKernel(sym, grid, params)
    pts = np.arange(-L, L + 1)
    rows = map_ordered(lambda l: kernel.row(int(l), l - pts), pts, threads)
    matrix = np.vstack(rows)
    logger.debug("z-section %s: %dx%d (N=%d)", sym.symbol_id, *matrix.shape, grid.n_nodes)
    return ZSection(L, matrix, grid, params, sym.symbol_id)


def export_zsection(section: ZSection, path: str, header: dict | None = None) -> str:
    n = section.matrix.shape[0]
    i, j = np.divmod(np.arange(n * n), n)
    frame = pd.DataFrame({
        "l": section.points[i],
        "d": section.points[j],
        "re": section.matrix.real.ravel(),
        "im": section.matrix.imag.ravel(),
    })
    head = {"q": section.params.q, "L": section.window, "N": section.grid.n_nodes,
            "symbol": section.symbol_id}
    head.update(header or {})
    return csv_io.write_csv(path, frame, header=head)


# ── Calderón–Vaillancourt check ─────────────────────────────────────

@dataclass(frozen=True)
class CVReport:
    symbol_id: str
    p: float
    window: int
    norm_lb: float
    seminorm: float
    ratio: float


def z_seminorm(sym: ZSymbol, points, grid: TorusGrid) -> float:
    """Sampled sup over l, s and k ≤ 2 of |∂_s^k ψ(l, s)|."""
    best = 0.0
    for l in points:
        for k in (0, 1, 2):
            vals = np.asarray(sym.derivative(int(l), grid.nodes, k), dtype=complex)
            if not np.all(np.isfinite(vals)):
                raise SymbolDomainError(f"{sym.symbol_id}: non-finite derivative of order {k} at l={l}")
            best = max(best, float(np.max(np.abs(vals))))
    return best


def cv_bound_check(sym: ZSymbol, p: float, L: int, grid: TorusGrid, params: TreeParams,
                   seed: int = 0, max_iters: int = 500) -> CVReport:
    from treeharm.norm_lab import pnorm_lower_bound

    section = finite_section(sym, L, grid, params)
    est = pnorm_lower_bound(section.matrix, p, max_iters=max_iters, seed=seed)
    m2 = z_seminorm(sym, section.points, section.grid)
    ratio = est.value / m2 if m2 > 0 else math.inf
    logger.info("cv check %s p=%g L=%d: norm_lb=%.6g M2=%.6g", sym.symbol_id, p, L, est.value, m2)
    return CVReport(sym.symbol_id, p, L, est.value, m2, ratio)
