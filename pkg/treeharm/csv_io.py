"""
CSV writers shared by section exports and experiment commands.

Files are UTF-8, comma separated, LF terminated, floats at 17 significant
digits.  An optional block of ``# key=value`` lines precedes the header and
an optional footer carries run-dependent values (runtime), so the body stays
byte-identical across runs.
"""

from __future__ import annotations

import io
import logging
import os
from typing import Mapping

import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _fmt(value) -> str:
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value)


def frame_to_csv(frame: pd.DataFrame, header: Mapping[str, object] | None = None,
                 footer: Mapping[str, object] | None = None) -> str:
    buf = io.StringIO()
    for key, value in (header or {}).items():
        buf.write(f"# {key}={_fmt(value)}\n")
    frame.to_csv(buf, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    for key, value in (footer or {}).items():
        buf.write(f"# {key}={_fmt(value)}\n")
    return buf.getvalue()


def write_csv(path: str, frame: pd.DataFrame, header: Mapping[str, object] | None = None,
              footer: Mapping[str, object] | None = None) -> str:
    text = frame_to_csv(frame, header, footer)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    logger.info("wrote %d rows to %s", len(frame), path)
    return path


def read_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


PLOT_TEMPLATE = '''\
"""Plot {title} from {csv_name}."""
import pandas as pd
import matplotlib.pyplot as plt

frame = pd.read_csv("{csv_name}", comment="#")
fig, ax = plt.subplots()
for key, group in frame.groupby({group!r}):
    ax.plot(group[{x!r}], group[{y!r}], marker="o", label=f"{group}={{key}}")
ax.set_xlabel({x!r})
ax.set_ylabel({y!r})
ax.set_title({title!r})
ax.legend()
fig.savefig("{stem}.png", dpi=150)
'''


def write_plot_script(csv_path: str, x: str, y: str, group: str, title: str) -> str:
    """Write a plain-text matplotlib script next to csv_path; never renders anything itself."""
    stem, _ = os.path.splitext(csv_path)
    script = stem + ".plot.py"
    text = PLOT_TEMPLATE.format(csv_name=os.path.basename(csv_path), stem=os.path.basename(stem),
                                x=x, y=y, group=group, title=title)
    with open(script, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    logger.info("wrote plot script %s", script)
    return script
