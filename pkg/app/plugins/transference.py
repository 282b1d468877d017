"""
transference – ℤ section norm of the induced symbol Ψ(ω₀_l, s − iδ_p)
next to the tree section norm of T_Ψ.
"""

from __future__ import annotations

import logging
import time

import pandas as pd

from app.config import RunConfig
from app.plugins.base import EXIT_OK, ExperimentPlugin
from treeharm import csv_io, norm_lab
from treeharm.spectral import torus_grid
from treeharm.symbols import parse_symbol

logger = logging.getLogger(__name__)


class TransferencePlugin(ExperimentPlugin):
    id = "transference"
    name = "Tree versus induced lattice operator norms"
    order = 40
    default_out = "transference.csv"

    def run(self, cfg: RunConfig) -> int:
        t0 = time.perf_counter()
        params = cfg.params
        grid = torus_grid(cfg.nodes, params)
        sym = parse_symbol(cfg.symbol, params)
        report = norm_lab.transference_probe(sym, cfg.p, cfg.window, grid, params,
                                             radius=min(cfg.window, cfg.radius),
                                             seed=cfg.seed, max_iters=cfg.max_iters)

        frame = pd.DataFrame([report.as_row()])
        header = {"q": cfg.q, "N": cfg.nodes, "seed": cfg.seed}
        footer = {"runtime_ms": (time.perf_counter() - t0) * 1e3} if cfg.timing else None
        csv_io.write_csv(self.out_path(cfg), frame, header=header, footer=footer)
        return EXIT_OK


plugin = TransferencePlugin()
