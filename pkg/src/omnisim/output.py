"""CSV / key-value writers.  Every number is written with 17 significant
digits so reruns are byte-identical and values round-trip exactly."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

WHEEL_COLUMNS = ("tick", "t", "wheel", "desired_omega", "raw_omega", "filtered_omega",
                 "err", "tau_d", "duty", "torque")
POSE_COLUMNS = ("t", "x", "y", "theta")


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return "%.17g" % float(value)


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_wheels_csv(log, path):
    """One row per (tick, wheel); wheels are numbered 1..4."""
    def rows():
        for j in range(log.ticks):
            for i in range(4):
                yield (j, log.t[j], i + 1, log.desired_omega[j, i], log.raw_omega[j, i],
                       log.filtered_omega[j, i], log.err[j, i], log.tau_d[j, i],
                       log.duty[j, i], log.torque[j, i])
    _write_rows(path, WHEEL_COLUMNS, rows())


def write_pose_csv(log, path):
    _write_rows(path, POSE_COLUMNS, ((t, *p) for t, p in zip(log.pose_t, log.pose)))


def write_profiles_csv(t, wheel_speeds, path):
    _write_rows(path, ("t", "wheel1", "wheel2", "wheel3", "wheel4"),
                ((ti, *w) for ti, w in zip(t, wheel_speeds)))


def write_kv(items, path):
    with open(path, "w") as fh:
        for key, value in items:
            if isinstance(value, str):
                fh.write(f"{key}={value}\n")
            else:
                fh.write(f"{key}={fmt(value)}\n")


def read_kv(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line and not line.startswith("#"):
            key, _, value = line.partition("=")
            out[key] = value
    return out


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


PLOT_STUB = '''"""Plot the CSV files in this directory (needs matplotlib)."""
import csv
import glob
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def read(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}


for path in sorted(glob.glob(os.path.join(here, "**", "*.csv"), recursive=True)):
    name = os.path.relpath(path, here)
    data = read(path)
    fig, ax = plt.subplots()
    if "wheel1" in data:
        for k in ("wheel1", "wheel2", "wheel3", "wheel4"):
            ax.plot(data["t"], data[k], label=k)
        ax.set_xlabel("t [s]")
        ax.set_ylabel("desired wheel speed [rad/s]")
    elif "x" in data:
        ax.plot(data["x"], data["y"])
        ax.set_aspect("equal")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
    elif "wheel" in data:
        for w in (1, 2, 3, 4):
            idx = [i for i, v in enumerate(data["wheel"]) if v == w]
            ax.plot([data["t"][i] for i in idx], [data["filtered_omega"][i] for i in idx], label=f"wheel{w}")
        ax.set_xlabel("t [s]")
        ax.set_ylabel("filtered speed [rad/s]")
    else:
        plt.close(fig)
        continue
    ax.set_title(name)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    fig.savefig(os.path.splitext(path)[0] + ".png", dpi=120)
    plt.close(fig)
'''


def write_plot_stub(out_dir):
    (Path(out_dir) / "plot.py").write_text(PLOT_STUB)
