"""spherical-table – φ_z(d) over the configured spectral points and d = 0..d_max."""

from __future__ import annotations

import logging

import numpy as np
import pandas as pd

from app.config import RunConfig
from app.plugins.base import EXIT_OK, ExperimentPlugin
from treeharm import csv_io
from treeharm.spectral import spherical_function

logger = logging.getLogger(__name__)


class SphericalTablePlugin(ExperimentPlugin):
    id = "spherical-table"
    name = "Table of elementary spherical functions"
    order = 50
    default_out = "spherical_table.csv"

    def run(self, cfg: RunConfig) -> int:
        params = cfg.params
        d_max = cfg.radius if cfg.d_max is None else cfg.d_max
        d = np.arange(d_max + 1)

        parts = []
        for z in cfg.spectral_points:
            phi = np.atleast_1d(spherical_function(z, d, params))
            parts.append(pd.DataFrame({
                "z_re": z.real,
                "z_im": z.imag,
                "d": d,
                "phi_re": phi.real,
                "phi_im": phi.imag,
            }))
        frame = pd.concat(parts, ignore_index=True)
        path = csv_io.write_csv(self.out_path(cfg), frame, header={"q": cfg.q, "d_max": d_max})
        self.emit_plot(cfg, path, x="d", y="phi_re", group="z_re")
        return EXIT_OK


plugin = SphericalTablePlugin()
