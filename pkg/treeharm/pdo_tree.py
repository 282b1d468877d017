"""
Pseudo-differential operators T_Ψ on the tree.

The kernel K(x, y) = c_G ∫_𝕋 Ψ(x, s) φ_s(d(x, y)) |c(s)|⁻² ds depends on y only
through d(x, y), so one quadrature pass per row vertex yields the whole
profile K(x, 0..d_max).  Operators act on the closed ball of the input;
nothing is claimed about the part of T_Ψ f outside it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import pandas as pd

from treeharm import csv_io, tree_core
from treeharm.errors import InvalidParameterError, SymbolDomainError
from treeharm.parallel import map_ordered
from treeharm.spectral import (
    TorusGrid,
    delta_p,
    inverse_c_function,
    spectral_weights,
    spherical_function,
    torus_grid,
)
from treeharm.symbols import MultiplierSymbol, TreeSymbol, as_tree_symbol, require_strip
from treeharm.transforms import (
    FiniteFunction,
    from_array,
    inverse_spherical,
    radial_profile,
    spherical_transform,
)
from treeharm.tree_core import TreeParams, Vertex

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class KernelSection:
    """Dense K(x, y) over ball(R), rows and columns in ball order."""

    params: TreeParams
    radius: int
    ball: tuple[Vertex, ...] = field(repr=False)
    entries: np.ndarray = field(repr=False)
    distances: np.ndarray = field(repr=False)
    grid: TorusGrid = field(repr=False)
    symbol_id: str = ""

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def distance_spread(self) -> float:
        """Largest spread of entries over pairs at equal distance (0 for radial kernels)."""
        spread = 0.0
        for d in np.unique(self.distances):
            vals = self.entries[self.distances == d]
            spread = max(spread, float(np.max(np.abs(vals - vals[0]))))
        return spread


def section_matrix(section: KernelSection) -> np.ndarray:
    return section.entries


# ── Symbol sampling ─────────────────────────────────────────────────

def _symbol_row(sym: TreeSymbol, x: Vertex, z: np.ndarray) -> np.ndarray:
    vals = np.asarray(sym.eval(x, z), dtype=complex) * np.ones(z.shape)
    if not np.all(np.isfinite(vals)):
        raise SymbolDomainError(f"{sym.symbol_id} returned non-finite values at {x}")
    return vals


@lru_cache(maxsize=32)
def _phi_table(params: TreeParams, n_nodes: int, d_max: int) -> np.ndarray:
    """Φ[d, k] = c_G · w · φ_{s_k}(d) · |c(s_k)|⁻²."""
    grid = torus_grid(n_nodes, params)
    d = np.arange(d_max + 1)
    phi = spherical_function(grid.nodes[None, :], d[:, None], params)
    table = phi * spectral_weights(grid, params)[None, :]
    table.setflags(write=False)
    return table


# ── Kernels ─────────────────────────────────────────────────────────

def kernel_profile(sym, x: Vertex, d_max: int, grid: TorusGrid, params: TreeParams) -> np.ndarray:
    """K(x, d) for d = 0..d_max from one pass over the grid."""
    if d_max < 0:
        raise InvalidParameterError(f"d_max must be >= 0, got {d_max}")
    sym = as_tree_symbol(sym)
    return _phi_table(params, grid.n_nodes, d_max) @ _symbol_row(sym, x, grid.nodes)


def kernel_direct(sym, x: Vertex, d: int, grid: TorusGrid, params: TreeParams) -> complex:
    """c_G Σ_k w Ψ(x, s_k) φ_{s_k}(d) |c(s_k)|⁻²."""
    if d < 0:
        raise InvalidParameterError(f"distance must be >= 0, got {d}")
    return complex(kernel_profile(sym, x, d, grid, params)[d])


def kernel_shifted(sym, x: Vertex, d: int, p: float, grid: TorusGrid, params: TreeParams) -> complex:
    """The kernel with the contour moved to 𝕋 + iδ_p.

    2 c_G q^{−d(1/2+δ_p)} Σ_k w Ψ(x, s_k + iδ_p) q^{i s_k d} / c(−s_k − iδ_p);
    the prefactor is q^{−d/p} for p < 2 and q^{−d/p′} for p > 2.
    """
    if d < 0:
        raise InvalidParameterError(f"distance must be >= 0, got {d}")
    sym = as_tree_symbol(sym)
    delta = delta_p(p)
    require_strip(sym, delta)
    z = grid.nodes + 1j * delta
    vals = _symbol_row(sym, x, z)
    waves = np.exp(1j * grid.nodes * d * params.log_q)
    inv_c = inverse_c_function(-z, params)
    total = np.sum(grid.weight * vals * waves * inv_c)
    return complex(2.0 * params.c_G * params.q ** (-d * (0.5 + delta)) * total)


def decay_witness(sym, x: Vertex, d_max: int, grid: TorusGrid, params: TreeParams) -> np.ndarray:
    """|K(x, d)| · q^{d/2} for d = 0..d_max."""
    prof = kernel_profile(sym, x, d_max, grid, params)
    return np.abs(prof) * params.q ** (np.arange(d_max + 1) / 2.0)


# ── Sections ────────────────────────────────────────────────────────

def assemble_section(sym, R: int, grid: TorusGrid, params: TreeParams,
                     threads: int | None = None) -> KernelSection:
    """entries[i, j] = K(ball[i], d(ball[i], ball[j])); rows assembled in parallel."""
    sym = as_tree_symbol(sym)
    verts = tuple(tree_core.ball(R, params))
    dist = tree_core.distance_matrix(verts)
    d_max = 2 * R

    if sym.is_multiplier:
        prof = kernel_profile(sym, tree_core.ROOT, d_max, grid, params)
        entries = prof[dist]
    else:
        rows = map_ordered(
            lambda i: kernel_profile(sym, verts[i], d_max, grid, params)[dist[i]],
            range(len(verts)),
            threads,
        )
        entries = np.vstack(rows)
    logger.debug("section %s: %dx%d (q=%d, N=%d)", sym.symbol_id, *entries.shape, params.q, grid.n_nodes)
    return KernelSection(params, R, verts, entries, dist, grid, sym.symbol_id)


def export_section(section: KernelSection, path: str, p: float | None = None) -> str:
    n = len(section.ball)
    i, j = np.divmod(np.arange(n * n), n)
    frame = pd.DataFrame({
        "i": i,
        "j": j,
        "d": section.distances.ravel(),
        "re": section.entries.real.ravel(),
        "im": section.entries.imag.ravel(),
    })
    header = {
        "q": section.params.q,
        "R": section.radius,
        "N": section.grid.n_nodes,
        "symbol": section.symbol_id,
        "p": "" if p is None else float(p),
    }
    return csv_io.write_csv(path, frame, header=header)


# ── Operators ───────────────────────────────────────────────────────

def apply_pdo(sym, f: FiniteFunction, grid: TorusGrid, section: KernelSection | None = None) -> FiniteFunction:
    """(T_Ψ f)(x) = Σ_y K(x, y) f(y) on the ball carrying f."""
    section = section or assemble_section(sym, f.support_radius, grid, f.params)
    return f.with_values(section.entries @ f.values)


def split_masks(vertices) -> tuple[np.ndarray, np.ndarray]:
    """χ₊ and χ₋ on pairs: h(x) − h(y) ≥ 0 and ≤ −1, heights along ω₀⁺."""
    h = np.array([tree_core.reference_height(v) for v in vertices])
    diff = h[:, None] - h[None, :]
    return diff >= 0, diff <= -1


def apply_split(sym, f: FiniteFunction, sign: str, grid: TorusGrid,
                section: KernelSection | None = None) -> FiniteFunction:
    """T⁺ f or T⁻ f; T⁺f + T⁻f = T_Ψ f."""
    if sign not in ("+", "-"):
        raise InvalidParameterError(f"sign must be '+' or '-', got {sign!r}")
    section = section or assemble_section(sym, f.support_radius, grid, f.params)
    plus, minus = split_masks(section.ball)
    mask = plus if sign == "+" else minus
    return f.with_values(np.where(mask, section.entries, 0.0) @ f.values)


def apply_multiplier(m, f: FiniteFunction, grid: TorusGrid) -> FiniteFunction:
    """Inverse spherical transform of m·f̂ for radial f; output radial on the same ball."""
    params = f.params
    prof = radial_profile(f)
    if isinstance(m, TreeSymbol):
        if not m.is_multiplier:
            raise InvalidParameterError(f"{m.symbol_id} depends on the vertex; use apply_pdo")
        mult = lambda s: m.eval(tree_core.ROOT, s)
    elif isinstance(m, MultiplierSymbol):
        mult = m.eval
    else:
        raise InvalidParameterError(f"not a multiplier: {m!r}")

    F = lambda s: np.asarray(mult(s), dtype=complex) * spherical_transform(prof, s, params)
    out = inverse_spherical(F, np.arange(f.support_radius + 1), grid, params)
    return from_array([out[v.depth] for v in f.vertices], f.support_radius, params)
