"""
kernel-check – the kernel K(x, d) from the real-line integral against the
contour shifted to Im z = δ_p, for every x in ball(R) and d ≤ 2R.
"""

from __future__ import annotations

import logging
import time

import numpy as np
import pandas as pd

from app.config import RunConfig
from app.plugins.base import ExperimentPlugin
from app.plugins.invert_roundtrip import vertex_label
from treeharm import csv_io, pdo_tree, tree_core
from treeharm.spectral import delta_p, torus_grid
from treeharm.symbols import parse_symbol, require_strip

logger = logging.getLogger(__name__)


class KernelCheckPlugin(ExperimentPlugin):
    id = "kernel-check"
    name = "Direct versus contour-shifted kernel"
    order = 20
    default_out = "kernel_check.csv"

    def run(self, cfg: RunConfig) -> int:
        t0 = time.perf_counter()
        params = cfg.params
        grid = torus_grid(cfg.nodes, params)
        sym = parse_symbol(cfg.symbol, params)
        require_strip(sym, delta_p(cfg.p))
        d_max = 2 * cfg.radius

        records = []
        for i, x in enumerate(tree_core.ball(cfg.radius, params)):
            direct = pdo_tree.kernel_profile(sym, x, d_max, grid, params)
            for d in range(d_max + 1):
                shifted = pdo_tree.kernel_shifted(sym, x, d, cfg.p, grid, params)
                records.append((i, vertex_label(x.word), d, direct[d].real, direct[d].imag,
                                shifted.real, shifted.imag, abs(shifted - direct[d])))
        frame = pd.DataFrame(records, columns=["i", "vertex", "d", "direct_re", "direct_im",
                                               "shifted_re", "shifted_im", "abs_diff"])

        header = {"q": cfg.q, "R": cfg.radius, "N": cfg.nodes, "symbol": sym.symbol_id, "p": cfg.p}
        footer = {"runtime_ms": (time.perf_counter() - t0) * 1e3} if cfg.timing else None
        path = csv_io.write_csv(self.out_path(cfg), frame, header=header, footer=footer)
        self.emit_plot(cfg, path, x="d", y="abs_diff", group="vertex")
        return self.verdict(float(np.max(frame["abs_diff"])), cfg.tol, "kernel discrepancy")


plugin = KernelCheckPlugin()
