"""Generators for standalone matplotlib scripts that redraw the experiment figures from CSV output.

Nothing here imports matplotlib; the emitted scripts do.
"""

from __future__ import annotations

_CURVES = '''\
"""{title}"""
import csv
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
FILES = {files!r}
LABELS = {labels!r}


def load(path):
    with open(HERE / path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["x1"]) for r in rows], [float(r["x2"]) for r in rows]


fig, axes = plt.subplots(1, len(FILES), figsize=(3.2 * len(FILES), 3.4), squeeze=False)
for ax, path, label in zip(axes[0], FILES, LABELS):
    x1, x2 = load(path)
    # the profile and its mirror image give the cross-section of the surface
    ax.plot(x1, x2, "k-", lw=1)
    ax.plot([-v for v in x1], x2, "k-", lw=1)
    ax.axvline(0.0, color="0.7", lw=0.5)
    ax.set_aspect("equal")
    ax.set_title(label, fontsize=9)
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else HERE / "{png}"
fig.savefig(out, dpi=150)
print(out)
'''

_AREA = '''\
"""{title}"""
import csv
import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
with open(HERE / {series!r}, newline="") as fh:
    rows = list(csv.DictReader(fh))
t = [float(r["t"]) for r in rows]
area = [float(r["area"]) for r in rows]

fig, ax = plt.subplots(figsize=(4.5, 3.2))
ax.plot(t, area, "k-", lw=1)
ax.set_xlabel("t")
ax.set_ylabel("surface area")
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else HERE / "{png}"
fig.savefig(out, dpi=150)
print(out)
'''


def curves_script(files: list[str], labels: list[str], title: str, png: str) -> str:
    """Script overlaying each snapshot CSV (and its mirror image) in its own panel."""
    if len(files) != len(labels):
        raise ValueError("need one label per file")
    return _CURVES.format(title=title, files=list(files), labels=list(labels), png=png)


def area_script(series_csv: str, title: str, png: str) -> str:
    """Script drawing surface area against time from a series CSV."""
    return _AREA.format(title=title, series=series_csv, png=png)


FIGURES = {
    "limacon": ("fig4_1", "Torus inscribed in a sphere: snapshots"),
    "shrinker_profile": ("fig4_2", "Self-intersecting shrinker: snapshots"),
    "cones": ("fig4_4", "Two cone singularities: snapshots"),
}
AREA_FIGURES = {"shrinker_profile": ("fig4_3", "Surface area of the shrinker evolution")}


def figure_names(family: str) -> tuple[tuple[str, str], tuple[str, str]]:
    curves = FIGURES.get(family, ("curves", f"{family}: snapshots"))
    area = AREA_FIGURES.get(family, ("area", f"{family}: surface area"))
    return curves, area
