"""
c-function, elementary spherical functions, Plancherel density and torus grids.

Everything here accepts numpy arrays for the spectral variable and
broadcasts; scalars come back as Python complex/float.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from treeharm.errors import InvalidGridError, InvalidParameterError, PoleProximityError
from treeharm.tree_core import TreeParams

logger = logging.getLogger(__name__)

# Distance to (τ/2)ℤ below which the special φ branches are used.
BRANCH_THRESHOLD = 1e-8
# |q^{iz} − q^{−iz}| below which c(z) is refused.
POLE_THRESHOLD = 1e-10

DEFAULT_NODES = 512


# ── Strip bookkeeping ───────────────────────────────────────────────

def delta_p(p: float) -> float:
    """Strip halfwidth δ_p = |1/p − 1/2| for 1 < p < ∞."""
    if not (1.0 < p < math.inf):
        raise InvalidParameterError(f"p must lie in (1, inf), got {p}")
    return abs(1.0 / p - 0.5)


def dual_exponent(p: float) -> float:
    if not (1.0 < p < math.inf):
        raise InvalidParameterError(f"p must lie in (1, inf), got {p}")
    return p / (p - 1.0)


def same_strip(p1: float, p2: float, tol: float = 1e-15) -> bool:
    return abs(delta_p(p1) - delta_p(p2)) <= tol


@dataclass(frozen=True)
class StripPoint:
    z: complex
    strip_halfwidth: float

    def __post_init__(self):
        if not 0.0 <= self.strip_halfwidth <= 0.5:
            raise InvalidParameterError(
                f"strip halfwidth must lie in [0, 1/2], got {self.strip_halfwidth}"
            )
        if abs(complex(self.z).imag) > self.strip_halfwidth + 1e-15:
            raise InvalidParameterError(
                f"|Im z| = {abs(complex(self.z).imag)} exceeds the strip halfwidth {self.strip_halfwidth}"
            )


def strip_point(z: complex, p: float) -> StripPoint:
    return StripPoint(complex(z), delta_p(p))


# ── Torus grids ─────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class TorusGrid:
    """Midpoint grid s_k = −τ/2 + (k+1/2)τ/N on 𝕋 = [−τ/2, τ/2)."""

    n_nodes: int
    nodes: np.ndarray
    weight: float
    tau: float

    def __len__(self) -> int:
        return self.n_nodes

    def refined(self, params: TreeParams) -> "TorusGrid":
        return torus_grid(2 * self.n_nodes, params)


def torus_grid(N: int, params: TreeParams) -> TorusGrid:
    if isinstance(N, bool) or int(N) != N or N < 4 or N % 2:
        raise InvalidGridError(f"number of nodes must be an even integer >= 4, got {N}")
    N = int(N)
    tau = params.tau
    nodes = -tau / 2.0 + (np.arange(N) + 0.5) * (tau / N)
    nodes.setflags(write=False)
    return TorusGrid(n_nodes=N, nodes=nodes, weight=tau / N, tau=tau)


def lattice_distance(z, params: TreeParams):
    """Distance from z to (τ/2)ℤ and the index k of the nearest lattice point kτ/2."""
    z = np.asarray(z, dtype=complex)
    half = params.tau / 2.0
    k = np.rint(z.real / half)
    return np.abs(z - k * half), k.astype(np.int64)


def _unwrap(value, scalar: bool):
    if scalar:
        return value.item()
    return value


# ── c-function ──────────────────────────────────────────────────────

def c_function(z, params: TreeParams):
    """c(z) = q^{1/2}/(q+1) · (q^{1/2+iz} − q^{−1/2−iz}) / (q^{iz} − q^{−iz})."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    q = params.q
    lq = params.log_q
    e_plus = np.exp(1j * z * lq)
    e_minus = np.exp(-1j * z * lq)
    den = e_plus - e_minus
    if np.any(np.abs(den) < POLE_THRESHOLD):
        bad = z.ravel()[np.argmin(np.abs(den).ravel())]
        raise PoleProximityError(f"c(z) evaluated at the pole set (τ/2)ℤ: z = {complex(bad)}")
    num = math.sqrt(q) * e_plus - e_minus / math.sqrt(q)
    return _unwrap(math.sqrt(q) / (q + 1) * num / den, scalar)


def inverse_c_function(z, params: TreeParams):
    """1/c(z); finite on |Im z| < 1/2 and zero on (τ/2)ℤ."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    q = params.q
    lq = params.log_q
    e_plus = np.exp(1j * z * lq)
    e_minus = np.exp(-1j * z * lq)
    num = e_plus - e_minus
    den = math.sqrt(q) * e_plus - e_minus / math.sqrt(q)
    return _unwrap((q + 1) / math.sqrt(q) * num / den, scalar)


# ── Spherical functions ─────────────────────────────────────────────

def _lattice_branch(dist: np.ndarray, q: int) -> np.ndarray:
    return ((q - 1) / (q + 1) * dist + 1.0) * q ** (-dist / 2.0)


def spherical_function(z, dist, params: TreeParams):
    """φ_z(x) for |x| = dist, closed form with the two lattice branches."""
    scalar = np.ndim(z) == 0 and np.ndim(dist) == 0
    z, d = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(dist, dtype=float))
    if np.any(d < 0):
        raise InvalidParameterError("distance must be >= 0")
    q = params.q
    lq = params.log_q
    gap, k = lattice_distance(z, params)
    special = gap < BRANCH_THRESHOLD
    out = np.empty(z.shape, dtype=complex)

    if np.any(special):
        ds = d[special]
        sign = np.where(k[special] % 2 == 0, 1.0, (-1.0) ** ds)
        out[special] = _lattice_branch(ds, q) * sign

    generic = ~special
    if np.any(generic):
        zg = z[generic]
        dg = d[generic]
        c_plus = c_function(zg, params)
        c_minus = c_function(-zg, params)
        out[generic] = (
            c_plus * np.exp((1j * zg - 0.5) * dg * lq)
            + c_minus * np.exp((-1j * zg - 0.5) * dg * lq)
        )
    return _unwrap(out, scalar)


# ── Plancherel density ──────────────────────────────────────────────

def plancherel_density(s, params: TreeParams):
    """|c(s)|⁻² on the real line, continuously extended by 0 on (τ/2)ℤ.

    Written as (q+1)²·4sin²θ / ((q−1)² + 4q·sin²θ) with θ = s·log q, which is
    1/(c(s)c(−s)) off the lattice and has no cancellation near it.
    """
    scalar = np.ndim(s) == 0
    s = np.asarray(s)
    if np.iscomplexobj(s):
        if np.any(np.abs(s.imag) > 0):
            raise InvalidParameterError("plancherel_density is defined for real s only")
        s = s.real
    s = s.astype(float)
    q = params.q
    sin2 = np.sin(s * params.log_q) ** 2
    dens = (q + 1) ** 2 * 4.0 * sin2 / ((q - 1) ** 2 + 4.0 * q * sin2)
    gap, _ = lattice_distance(s, params)
    dens = np.where(gap < BRANCH_THRESHOLD, 0.0, dens)
    return _unwrap(dens, scalar)


def spectral_weights(grid: TorusGrid, params: TreeParams) -> np.ndarray:
    """c_G · weight · |c(s_k)|⁻² at every grid node."""
    return params.c_G * grid.weight * plancherel_density(grid.nodes, params)


def plancherel_mass(params: TreeParams, grid: TorusGrid) -> float:
    """c_G ∫_𝕋 |c(s)|⁻² ds by quadrature; the inversion theorem at o says this is 1."""
    return float(np.sum(spectral_weights(grid, params)))
