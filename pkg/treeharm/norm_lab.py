"""
Finite-section Lᵖ norm estimates and the experiments built on them.

Every estimate is a lower bound: it is ||A x||_p / ||x||_p for the vector
it returns.  p = 2 is answered by a singular value decomposition; other
exponents run the dual-norm fixed point iteration (the p-norm power
method) from several starts and keep the best quotient seen.
"""

from __future__ import annotations

import logging
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from treeharm import pdo_tree, pdo_z, tree_core
from treeharm.errors import InvalidInputError, InvalidParameterError
from treeharm.spectral import TorusGrid, delta_p, dual_exponent
from treeharm.symbols import (
    MultiplierSymbol,
    TreeSymbol,
    as_tree_symbol,
    cv_seminorm,
    induced_z_symbol,
    require_strip,
    z_multiplier,
)
from treeharm.tree_core import TreeParams

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 500
REL_TOL = 1e-10

SWEEP_COLUMNS = ["q", "p", "R", "N", "symbol", "norm_lb", "iters", "converged", "seed", "runtime_ms"]


@dataclass(frozen=True, eq=False)
class NormEstimate:
    p: float
    value: float
    iterations: int
    converged: bool
    seed: int
    vector: np.ndarray = field(repr=False)


# ── p-norm power method ─────────────────────────────────────────────

def _pnorm(x: np.ndarray, p: float) -> float:
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def _phase(x: np.ndarray) -> np.ndarray:
    mag = np.abs(x)
    return np.where(mag > 0, x / np.where(mag > 0, mag, 1.0), 0.0)


def _dual(y: np.ndarray, p: float) -> np.ndarray:
    """The unit vector z in ℓ^{p′} with z^H y = ||y||_p."""
    norm = _pnorm(y, p)
    if norm == 0.0:
        return np.zeros_like(y)
    return _phase(y) * (np.abs(y) / norm) ** (p - 1.0)


def _normalise(x: np.ndarray, p: float) -> np.ndarray:
    norm = _pnorm(x, p)
    return x / norm if norm > 0 else x


def _iterate(A: np.ndarray, p: float, x: np.ndarray, max_iters: int) -> tuple[float, np.ndarray, int, bool]:
    pd_ = dual_exponent(p)
    x = _normalise(x.astype(complex), p)
    best, best_x = 0.0, x
    prev = None
    for it in range(1, max_iters + 1):
        y = A @ x
        est = _pnorm(y, p)
        if est > best:
            best, best_x = est, x
        z = A.conj().T @ _dual(y, p)
        if _pnorm(z, pd_) <= np.real(np.vdot(z, x)) * (1.0 + 1e-15):
            return best, best_x, it, True
        if prev is not None and abs(est - prev) <= REL_TOL * max(est, 1e-300):
            return best, best_x, it, True
        prev = est
        nxt = _dual(z, pd_)
        if not np.any(nxt):
            return best, best_x, it, True
        x = nxt
    return best, best_x, max_iters, False


def pnorm_lower_bound(matrix, p: float, max_iters: int = DEFAULT_MAX_ITERS, seed: int = 0,
                      x0: np.ndarray | None = None) -> NormEstimate:
    """Lower bound for the induced ℓᵖ → ℓᵖ norm of ``matrix``.

    ``x0`` is an optional warm start (zero-padded when shorter than the
    matrix); the result is never below the quotient it attains.
    """
    A = np.asarray(matrix, dtype=complex)
    if A.ndim != 2 or A.size == 0:
        raise InvalidInputError(f"expected a non-empty matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    if not (1.0 < p < math.inf):
        raise InvalidParameterError(f"p must lie in (1, inf), got {p}")
    n = A.shape[1]

    warm = None
    if x0 is not None:
        warm = np.zeros(n, dtype=complex)
        x0 = np.asarray(x0, dtype=complex).ravel()[:n]
        warm[: len(x0)] = x0
        if not np.any(warm):
            warm = None

    if p == 2.0:
        _, S, Vh = np.linalg.svd(A)
        value, vector, iters = float(S[0]), Vh[0].conj(), 1
        if warm is not None:
            w = _normalise(warm, 2.0)
            wv = _pnorm(A @ w, 2.0)
            if wv > value:
                value, vector = wv, w
        return NormEstimate(p, value, iters, True, seed, vector)

    rng = np.random.default_rng(seed)
    starts = [
        rng.standard_normal(n) + 1j * rng.standard_normal(n),
        np.ones(n, dtype=complex),
        np.eye(n, dtype=complex)[int(np.argmax([_pnorm(A[:, j], p) for j in range(n)]))],
    ]
    if warm is not None:
        starts.append(warm)

    best = (-1.0, None, 0, False)
    for x in starts:
        value, vec, iters, converged = _iterate(A, p, x, max_iters)
        if value > best[0]:
            best = (value, vec, iters, converged)
    value, vec, iters, converged = best
    if not converged:
        logger.warning("p-norm iteration hit %d iterations without converging (p=%g, n=%d)", max_iters, p, n)
    # report exactly the quotient attained by the returned vector
    value = _pnorm(A @ vec, p) / _pnorm(vec, p)
    return NormEstimate(p, value, iters, converged, seed, vec)


# ── Sweeps ──────────────────────────────────────────────────────────

def cell_seed(master: int, index: int) -> int:
    """Seed of sweep cell ``index``: first word of SeedSequence([master, index])."""
    return int(np.random.SeedSequence([int(master), int(index)]).generate_state(1)[0])


@dataclass(frozen=True)
class SweepRow:
    q: int
    p: float
    R: int
    N: int
    symbol: str
    norm_lb: float
    iters: int
    converged: bool
    seed: int
    runtime_ms: float = 0.0


def norm_growth_sweep(sym: TreeSymbol | MultiplierSymbol, p: float, radii: Sequence[int], grid: TorusGrid,
                      params: TreeParams, seed: int = 0, max_iters: int = DEFAULT_MAX_ITERS,
                      timing: bool = False, progress: bool = False,
                      threads: int | None = None) -> list[SweepRow]:
    """Section norm estimates of T_Ψ over increasing radii.

    One section is assembled at the largest radius; the smaller ones are
    its leading principal blocks.  Each radius is warm-started from the
    previous maximiser, so norm_lb is nondecreasing in R.
    """
    sym = as_tree_symbol(sym)
    radii = sorted(set(int(r) for r in radii))
    if not radii or radii[0] < 0:
        raise InvalidParameterError(f"radii must be non-negative, got {radii}")
    section = pdo_tree.assemble_section(sym, radii[-1], grid, params, threads=threads)

    rows: list[SweepRow] = []
    warm = None
    bar = tqdm(radii, desc=f"{sym.symbol_id} p={p:g}", disable=not progress, file=sys.stderr, leave=False)
    for index, R in enumerate(bar):
        n = tree_core.ball_size(R, params)
        cseed = cell_seed(seed, index)
        t0 = time.perf_counter()
        est = pnorm_lower_bound(section.entries[:n, :n], p, max_iters=max_iters, seed=cseed, x0=warm)
        elapsed = (time.perf_counter() - t0) * 1e3 if timing else 0.0
        warm = est.vector
        rows.append(SweepRow(params.q, float(p), R, grid.n_nodes, sym.symbol_id, est.value,
                             est.iterations, est.converged, cseed, elapsed))
        logger.debug("sweep %s p=%g R=%d: %.12g (%d iters)", sym.symbol_id, p, R, est.value, est.iterations)
    return rows


def sweep_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    """Rows as a frame in CSV column order, sorted by (p, R, symbol)."""
    frame = pd.DataFrame([vars(r) for r in rows], columns=SWEEP_COLUMNS)
    frame["converged"] = frame["converged"].astype(int)
    return frame.sort_values(["p", "R", "symbol"], kind="mergesort").reset_index(drop=True)


# ── Transference ────────────────────────────────────────────────────

@dataclass(frozen=True)
class TransferenceReport:
    symbol_id: str
    p: float
    window: int
    radius: int
    z_norm: NormEstimate
    tree_norm: NormEstimate

    def as_row(self) -> dict:
        return {
            "symbol": self.symbol_id,
            "p": self.p,
            "L": self.window,
            "R": self.radius,
            "z_norm_lb": self.z_norm.value,
            "tree_norm_lb": self.tree_norm.value,
            "z_iters": self.z_norm.iterations,
            "tree_iters": self.tree_norm.iterations,
        }


def _probe(tree_sym: TreeSymbol, z_sym, p: float, L: int, grid: TorusGrid, params: TreeParams,
           radius: int | None, seed: int, max_iters: int) -> TransferenceReport:
    R = min(L, 5) if radius is None else radius
    zgrid = pdo_z.grid_for(z_sym, grid.n_nodes, params, window=L)
    zsec = pdo_z.finite_section(z_sym, L, zgrid, params)
    tsec = pdo_tree.assemble_section(tree_sym, R, grid, params)
    z_est = pnorm_lower_bound(zsec.matrix, p, max_iters=max_iters, seed=cell_seed(seed, 0))
    t_est = pnorm_lower_bound(tsec.entries, p, max_iters=max_iters, seed=cell_seed(seed, 1))
    logger.info("transference %s p=%g: Z[L=%d]=%.9g tree[R=%d]=%.9g",
                tree_sym.symbol_id, p, L, z_est.value, R, t_est.value)
    return TransferenceReport(tree_sym.symbol_id, float(p), L, R, z_est, t_est)


def transference_probe(sym: TreeSymbol | MultiplierSymbol, p: float, L: int, grid: TorusGrid,
                       params: TreeParams, radius: int | None = None, seed: int = 0,
                       max_iters: int = DEFAULT_MAX_ITERS) -> TransferenceReport:
    """ℤ section norm of ψ(l, s) = Ψ(ω₀_l, s − iδ_p) beside the tree section norm of T_Ψ."""
    sym = as_tree_symbol(sym)
    zsym = induced_z_symbol(sym, -delta_p(p), params)
    return _probe(sym, zsym, p, L, grid, params, radius, seed, max_iters)


def multiplier_transference(m: MultiplierSymbol, p: float, L: int, grid: TorusGrid, params: TreeParams,
                            radius: int | None = None, seed: int = 0,
                            max_iters: int = DEFAULT_MAX_ITERS) -> TransferenceReport:
    """The multiplier case: the ℤ multiplier s ↦ m(s − iδ_p)."""
    delta = delta_p(p)
    require_strip(m, delta)
    return _probe(as_tree_symbol(m), z_multiplier(m, -delta), p, L, grid, params, radius, seed, max_iters)


# ── Calderón–Vaillancourt on the tree (p > 2) ───────────────────────

@dataclass(frozen=True)
class CVTreeRow:
    R: int
    norm_lb: float
    seminorm_real: float
    seminorm_upper: float
    seminorm_lower: float


def cv_tree_report(sym: TreeSymbol | MultiplierSymbol, p: float, radii: Sequence[int], grid: TorusGrid,
                   params: TreeParams, seed: int = 0, max_iters: int = DEFAULT_MAX_ITERS) -> pd.DataFrame:
    """Section norms for 2 < p < ∞ next to the symbol seminorms on Im z = 0, ±δ_p."""
    if not (2.0 < p < math.inf):
        raise InvalidParameterError(f"cv_tree_report needs 2 < p < inf, got {p}")
    sym = as_tree_symbol(sym)
    delta = delta_p(p)
    rows = norm_growth_sweep(sym, p, radii, grid, params, seed=seed, max_iters=max_iters)
    out = []
    for row in rows:
        verts = tree_core.ball(row.R, params)
        out.append(CVTreeRow(
            row.R,
            row.norm_lb,
            cv_seminorm(sym, verts, grid, 0.0),
            cv_seminorm(sym, verts, grid, delta),
            cv_seminorm(sym, verts, grid, -delta),
        ))
    return pd.DataFrame([vars(r) for r in out])
