"""
norm-sweep – finite-section Lᵖ norm estimates of T_Ψ over growing radii.

One row per (p, R) cell, sorted by (p, R, symbol).  Exit 1 if a sweep
fails to be nondecreasing in R.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from app.config import RunConfig
from app.plugins.base import EXIT_OK, EXIT_TOLERANCE, ExperimentPlugin
from treeharm import csv_io, norm_lab
from treeharm.parallel import map_ordered
from treeharm.spectral import torus_grid
from treeharm.symbols import parse_symbol

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-12


class NormSweepPlugin(ExperimentPlugin):
    id = "norm-sweep"
    name = "Section norm growth over radii"
    order = 30
    default_out = "norm_sweep.csv"

    def run(self, cfg: RunConfig) -> int:
        t0 = time.perf_counter()
        params = cfg.params
        grid = torus_grid(cfg.nodes, params)
        sym = parse_symbol(cfg.symbol, params)

        def sweep(p: float):
            return norm_lab.norm_growth_sweep(sym, p, cfg.radii, grid, params, seed=cfg.seed,
                                              max_iters=cfg.max_iters, timing=cfg.timing,
                                              progress=self.progress)

        per_p = map_ordered(sweep, cfg.exponents)
        frame = norm_lab.sweep_frame([row for rows in per_p for row in rows])
        footer = {"runtime_ms": (time.perf_counter() - t0) * 1e3} if cfg.timing else None
        path = csv_io.write_csv(self.out_path(cfg), frame, footer=footer)
        self.emit_plot(cfg, path, x="R", y="norm_lb", group="p")

        status = EXIT_OK
        for p, group in frame.groupby("p", sort=True):
            vals = group["norm_lb"].to_numpy()
            logger.info("p=%g: %s", p, ", ".join(f"R={r}: {v:.6g}" for r, v in zip(group["R"], vals)))
            if np.any(np.diff(vals) < -MONOTONE_SLACK * np.maximum(1.0, vals[:-1])):
                logger.error("p=%g: norm estimates decrease with R", p)
                status = EXIT_TOLERANCE
        return status


plugin = NormSweepPlugin()
