"""
Helgason-Fourier and spherical transforms on the tree, their inverses, and
the Fourier pair on ℤ.

Finitely supported functions live on a ball and are stored as arrays in
ball order.  Transforms are dense sums; the only approximation anywhere is
the midpoint rule on 𝕋.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from treeharm import tree_core
from treeharm.errors import InsufficientDepthError, InvalidInputError
from treeharm.spectral import TorusGrid, spectral_weights, spherical_function, torus_grid
from treeharm.tree_core import BoundaryCylinder, TreeParams, Vertex

logger = logging.getLogger(__name__)

RADIAL_TOL = 1e-12


# ── Functions on the tree ───────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class FiniteFunction:
    """Complex function on ball(R), zero outside; values follow ball order."""

    params: TreeParams
    support_radius: int
    values: np.ndarray
    vertices: tuple[Vertex, ...] = field(repr=False)

    def __post_init__(self):
        if len(self.values) != len(self.vertices):
            raise InvalidInputError(
                f"{len(self.values)} values for a ball of {len(self.vertices)} vertices"
            )

    @property
    def index(self) -> dict[Vertex, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def value(self, x: Vertex) -> complex:
        if x.depth > self.support_radius:
            return 0j
        return complex(self.values[self.index[x]])

    def as_dict(self) -> dict[Vertex, complex]:
        return {v: complex(a) for v, a in zip(self.vertices, self.values)}

    def with_values(self, values) -> "FiniteFunction":
        return from_array(values, self.support_radius, self.params)

    def __add__(self, other: "FiniteFunction") -> "FiniteFunction":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "FiniteFunction") -> "FiniteFunction":
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar: complex) -> "FiniteFunction":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__


def from_array(values, R: int, params: TreeParams) -> FiniteFunction:
    verts = tuple(tree_core.ball(R, params))
    arr = np.array(values, dtype=complex).ravel()
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("function values must be finite")
    arr.setflags(write=False)
    return FiniteFunction(params, R, arr, verts)


def from_mapping(values: Mapping[Vertex, complex], R: int, params: TreeParams) -> FiniteFunction:
    verts = tree_core.ball(R, params)
    for x in values:
        if x.depth > R:
            raise InvalidInputError(f"{x} lies outside the ball of radius {R}")
    return from_array([values.get(v, 0.0) for v in verts], R, params)


def delta(x: Vertex, R: int, params: TreeParams) -> FiniteFunction:
    return from_mapping({x: 1.0}, R, params)


def radial(values_by_d: Sequence[complex], params: TreeParams) -> FiniteFunction:
    R = len(values_by_d) - 1
    verts = tree_core.ball(R, params)
    return from_array([values_by_d[v.depth] for v in verts], R, params)


def random_function(R: int, params: TreeParams, rng: np.random.Generator) -> FiniteFunction:
    n = tree_core.ball_size(R, params)
    return from_array(rng.standard_normal(n) + 1j * rng.standard_normal(n), R, params)


def radial_profile(f: FiniteFunction, tol: float = RADIAL_TOL) -> np.ndarray:
    """Values of a radial f by distance; raises if f is not constant on spheres."""
    depths = np.array([v.depth for v in f.vertices])
    out = np.empty(f.support_radius + 1, dtype=complex)
    for d in range(f.support_radius + 1):
        vals = f.values[depths == d]
        if np.max(np.abs(vals - vals[0])) > tol:
            raise InvalidInputError(f"function is not radial on the sphere of radius {d}")
        out[d] = vals[0]
    return out


# ── Helgason-Fourier transform ──────────────────────────────────────

@dataclass(frozen=True, eq=False)
class HelgasonTable:
    params: TreeParams
    grid: TorusGrid
    cylinders: tuple[BoundaryCylinder, ...]
    entries: np.ndarray  # (N, J): f̃(s_k, ω_j)

    @property
    def depth(self) -> int:
        return self.cylinders[0].depth


def _plane_waves(nodes: np.ndarray, heights: np.ndarray, params: TreeParams, sign: float) -> np.ndarray:
    """q^{(1/2 + sign·i s) h} for every node s and height h."""
    return np.exp((0.5 + sign * 1j * nodes[:, None]) * heights[None, :] * params.log_q)


def helgason_value(f: FiniteFunction, z: complex, omega: BoundaryCylinder) -> complex:
    """f̃(z, ω) = Σ_x f(x) q^{(1/2+iz) h_ω(x)} at a single point."""
    h = np.array([tree_core.height(x, omega) for x in f.vertices], dtype=float)
    return complex(np.sum(f.values * np.exp((0.5 + 1j * z) * h * f.params.log_q)))


def helgason_transform(f: FiniteFunction, grid: TorusGrid, D: int | None = None) -> HelgasonTable:
    params = f.params
    R = f.support_radius
    D = max(R, 1) if D is None else D
    if D < R:
        raise InsufficientDepthError(f"cylinder depth {D} is smaller than the support radius {R}")
    cylinders = tuple(tree_core.boundary_cylinders(D, params))
    H = tree_core.height_matrix(f.vertices, cylinders)

    # group f by height per cylinder: A[h + R, j] = Σ_{x : h_j(x) = h} f(x)
    levels = np.arange(-R, R + 1)
    A = np.stack([(f.values[:, None] * (H == h)).sum(axis=0) for h in levels])
    entries = _plane_waves(grid.nodes, levels.astype(float), params, +1.0) @ A
    logger.debug("helgason table %dx%d (R=%d, D=%d)", *entries.shape, R, D)
    return HelgasonTable(params, grid, cylinders, entries)


def inverse_helgason(table: HelgasonTable, x: Vertex, params: TreeParams | None = None) -> complex:
    """c_G Σ_k w Σ_j ν_j q^{(1/2−is_k)h_j(x)} f̃(s_k, ω_j) |c(s_k)|⁻²."""
    params = params or table.params
    if table.depth < x.depth:
        raise InsufficientDepthError(f"cylinder depth {table.depth} is smaller than |x| = {x.depth}")
    h = tree_core.height_matrix([x], table.cylinders)[0].astype(float)
    nu = np.array([c.nu_mass for c in table.cylinders])
    waves = _plane_waves(table.grid.nodes, h, params, -1.0)
    inner = (waves * table.entries) @ nu
    return complex(np.dot(spectral_weights(table.grid, params), inner))


def reconstruct(table: HelgasonTable, R: int) -> FiniteFunction:
    """Apply the inversion formula at every vertex of ball(R)."""
    params = table.params
    verts = tree_core.ball(R, params)
    return from_array([inverse_helgason(table, x, params) for x in verts], R, params)


# ── Spherical transform ─────────────────────────────────────────────

def _profile(f) -> np.ndarray:
    if isinstance(f, FiniteFunction):
        return radial_profile(f)
    return np.asarray(f, dtype=complex)


def spherical_transform(f, z, params: TreeParams):
    """f̂(z) = Σ_d f(d) |S_d| φ_z(d) for radial f (FiniteFunction or values by distance)."""
    prof = _profile(f)
    if isinstance(f, FiniteFunction):
        params = f.params
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    sizes = np.array([tree_core.sphere_size(d, params) for d in range(len(prof))], dtype=float)
    d = np.arange(len(prof))
    phi = spherical_function(z[:, None], d[None, :], params)
    out = phi @ (prof * sizes)
    return complex(out[0]) if scalar else out


def inverse_spherical(F: Callable, dist, grid: TorusGrid, params: TreeParams):
    """c_G Σ_k w F(s_k) φ_{s_k}(dist) |c(s_k)|⁻²."""
    values = np.asarray(F(grid.nodes), dtype=complex) * spectral_weights(grid, params)
    scalar = np.ndim(dist) == 0
    d = np.atleast_1d(np.asarray(dist))
    phi = spherical_function(grid.nodes[None, :], d[:, None], params)
    out = phi @ values
    return complex(out[0]) if scalar else out


# ── Fourier pair on ℤ ───────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class ZFunction:
    """Finitely supported function on ℤ, values[i] = f(l_min + i)."""

    l_min: int
    values: np.ndarray

    @property
    def l_max(self) -> int:
        return self.l_min + len(self.values) - 1

    @property
    def support(self) -> tuple[int, int]:
        return self.l_min, self.l_max

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.l_min, self.l_max + 1)

    def value(self, l: int) -> complex:
        if self.l_min <= l <= self.l_max:
            return complex(self.values[l - self.l_min])
        return 0j

    def window(self, lo: int, hi: int) -> np.ndarray:
        return np.array([self.value(l) for l in range(lo, hi + 1)], dtype=complex)


def zfunction(values: Mapping[int, complex] | Sequence[complex], l_min: int = 0) -> ZFunction:
    if isinstance(values, Mapping):
        if not values:
            return ZFunction(0, np.zeros(1, dtype=complex))
        lo, hi = min(values), max(values)
        arr = np.array([values.get(l, 0.0) for l in range(lo, hi + 1)], dtype=complex)
        return ZFunction(int(lo), arr)
    arr = np.array(values, dtype=complex).ravel()
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("function values must be finite")
    return ZFunction(int(l_min), arr)


def z_fourier(f: ZFunction, s, params: TreeParams):
    """Ff(s) = Σ_d f(d) q^{−ids}."""
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.exp(-1j * s[:, None] * f.points[None, :] * params.log_q) @ f.values
    return complex(out[0]) if scalar else out


def z_inverse(F: Callable, l, grid: TorusGrid, params: TreeParams):
    """(1/τ) Σ_k w F(s_k) q^{i l s_k}."""
    values = np.asarray(F(grid.nodes), dtype=complex) * np.ones(grid.n_nodes)
    scalar = np.ndim(l) == 0
    l = np.atleast_1d(np.asarray(l))
    waves = np.exp(1j * l[:, None] * grid.nodes[None, :] * params.log_q)
    out = waves @ values * (grid.weight / grid.tau)
    return complex(out[0]) if scalar else out


# ── Quadrature certification ────────────────────────────────────────

def certify_quadrature(fn: Callable[[TorusGrid], complex], N: int, params: TreeParams):
    """Evaluate fn on N and 2N nodes; returns (value_N, value_2N, |difference|)."""
    coarse = fn(torus_grid(N, params))
    fine = fn(torus_grid(2 * N, params))
    defect = float(np.max(np.abs(np.asarray(fine) - np.asarray(coarse))))
    return coarse, fine, defect
