"""
invert-roundtrip – Helgason transform of a seeded random function on
ball(R), inverted again vertex by vertex.

Exit 0 iff the largest reconstruction error is below --tol.
"""

from __future__ import annotations

import logging
import time

import numpy as np
import pandas as pd

from app.config import RunConfig
from app.plugins.base import ExperimentPlugin
from treeharm import csv_io, transforms
from treeharm.norm_lab import cell_seed
from treeharm.spectral import torus_grid

logger = logging.getLogger(__name__)


def vertex_label(word) -> str:
    return ".".join(str(a) for a in word) or "o"


class InvertRoundtripPlugin(ExperimentPlugin):
    id = "invert-roundtrip"
    name = "Helgason transform round trip on a ball"
    order = 10
    default_out = "invert_roundtrip.csv"

    def run(self, cfg: RunConfig) -> int:
        t0 = time.perf_counter()
        params = cfg.params
        grid = torus_grid(cfg.nodes, params)
        rng = np.random.default_rng(cell_seed(cfg.seed, 0))
        f = transforms.random_function(cfg.radius, params, rng)

        table = transforms.helgason_transform(f, grid, cfg.cylinder_depth)
        back = transforms.reconstruct(table, cfg.radius)
        err = np.abs(back.values - f.values)

        frame = pd.DataFrame({
            "i": np.arange(len(f.vertices)),
            "vertex": [vertex_label(v.word) for v in f.vertices],
            "depth": [v.depth for v in f.vertices],
            "abs_error": err,
        })
        header = {"q": cfg.q, "R": cfg.radius, "N": cfg.nodes, "D": cfg.cylinder_depth, "seed": cfg.seed}
        footer = {"runtime_ms": (time.perf_counter() - t0) * 1e3} if cfg.timing else None
        path = csv_io.write_csv(self.out_path(cfg), frame, header=header, footer=footer)
        self.emit_plot(cfg, path, x="i", y="abs_error", group="depth")
        return self.verdict(float(err.max()), cfg.tol, "reconstruction error")


plugin = InvertRoundtripPlugin()
