"""
Base plugin class for treeharm experiment commands.

To create a new command:
  1. Create a file in app/plugins/
  2. Define a class that extends ExperimentPlugin
  3. Implement the required properties and run()
  4. Expose an instance as the module-level ``plugin``; it is auto-discovered

Example:
    class Hello(ExperimentPlugin):
        id = "hello"
        name = "Say hello"
        order = 99

        def run(self, cfg):
            logger.info("hello from q=%d", cfg.q)
            return EXIT_OK
"""

from __future__ import annotations

import argparse
import logging
import os
from abc import ABC, abstractmethod

from app.config import RunConfig
from treeharm import csv_io

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2


class ExperimentPlugin(ABC):
    """Base class every experiment command must extend."""

    id: str = ""          # subcommand name (e.g. "norm-sweep")
    name: str = ""        # one-line help shown by --list and -h
    order: int = 50       # position in --list and the help text (lower = first)
    default_out: str = ""  # CSV written when --out is not given
    progress: bool = False  # tqdm bars on stderr, set by main

    def add_arguments(self, parser: argparse.ArgumentParser):
        """Add command-specific flags on top of the common ones."""

    @abstractmethod
    def run(self, cfg: RunConfig) -> int:
        """Execute the command and return its exit code."""

    def out_path(self, cfg: RunConfig) -> str:
        return cfg.out or os.path.join("results", self.default_out or f"{self.id}.csv")

    def emit_plot(self, cfg: RunConfig, csv_path: str, x: str, y: str, group: str):
        if cfg.plot:
            csv_io.write_plot_script(csv_path, x=x, y=y, group=group, title=f"{self.id} ({cfg.symbol})")

    def verdict(self, value: float, tol: float, what: str) -> int:
        if value < tol:
            logger.info("%s: max %s = %.3e < tol %.1e – PASS", self.id, what, value, tol)
            return EXIT_OK
        logger.error("%s: max %s = %.3e >= tol %.1e – FAIL", self.id, what, value, tol)
        return EXIT_TOLERANCE

    def manifest(self) -> dict:
        return {"id": self.id, "name": self.name, "order": self.order}
