"""
CSV files written by the command line tool.

dB values are printed with six decimals. Anything below ``FLOOR_DB`` is
written as ``-inf-floor``; theory entries without a value are written as
``unstable`` (no steady state) or ``n/a`` (no closed form). Lines starting
with ``#`` carry provenance and are skipped by the readers.
"""

from __future__ import annotations

import csv
import math

import numpy as np

FLOOR_DB = -200.0
FLOOR_TOKEN = "-inf-floor"

CURVE_HEADER = ["iteration", "node", "msd_db", "emse_db", "mse_db"]
STEADY_HEADER = ["node", "msd_theory_db", "emse_theory_db", "msd_sim_db",
                 "emse_sim_db", "msd_gap_db", "emse_gap_db"]
SWEEP_HEADER = ["param", "value", "node", "alpha", "msd_theory_db", "emse_theory_db",
                "msd_sim_db", "emse_sim_db", "msd_gap_db", "emse_gap_db",
                "diverged_runs", "ripple_flag"]


def fmt_db(x, missing="n/a"):
    x = float(x)
    if math.isnan(x):
        return missing
    if x < FLOOR_DB:
        return FLOOR_TOKEN
    if math.isinf(x):
        return "inf"
    return f"{x:.6f}"


def parse_db(text):
    text = text.strip()
    if text == FLOOR_TOKEN:
        return -math.inf
    if text in ("n/a", "unstable"):
        return math.nan
    return float(text)


def _missing(report):
    return "unstable" if report.theory_stable is False else "n/a"


def steady_rows(report):
    miss = _missing(report)
    gaps = (report.msd_gap_db, report.emse_gap_db)
    for k in range(len(report.msd_sim_db)):
        yield [str(k + 1),
               fmt_db(report.msd_theory_db[k], miss), fmt_db(report.emse_theory_db[k], miss),
               fmt_db(report.msd_sim_db[k]), fmt_db(report.emse_sim_db[k]),
               fmt_gap(gaps[0][k], miss), fmt_gap(gaps[1][k], miss)]


def fmt_gap(x, missing):
    x = float(x)
    if math.isnan(x):
        return missing
    return "inf" if x == math.inf else ("-inf" if x == -math.inf else f"{x:.6f}")


def _open(path, provenance):
    fh = open(path, "w", newline="")
    if provenance:
        fh.write(f"# {provenance}\n")
    return fh, csv.writer(fh, lineterminator="\n")


def write_curves(path, curves, provenance=""):
    msd, emse, mse = curves.msd_db, curves.emse_db, curves.mse_db
    fh, w = _open(path, provenance)
    with fh:
        w.writerow(CURVE_HEADER)
        for i in range(msd.shape[0]):
            for k in range(msd.shape[1]):
                w.writerow([i, k + 1, fmt_db(msd[i, k]), fmt_db(emse[i, k]), fmt_db(mse[i, k])])


def write_steady(path, report, provenance=""):
    fh, w = _open(path, provenance)
    with fh:
        w.writerow(STEADY_HEADER)
        w.writerows(steady_rows(report))


def write_sweep(path, entries, provenance=""):
    """``entries`` is a list of (param, value, report)."""
    fh, w = _open(path, provenance)
    with fh:
        w.writerow(SWEEP_HEADER)
        for param, value, report in entries:
            alpha = report.metadata.get("alpha")
            diverged = len(report.metadata.get("diverged_runs", []))
            ripple = int(bool(report.metadata.get("ripple_flag")))
            for row in steady_rows(report):
                w.writerow([param, repr(float(value)), row[0],
                            "n/a" if alpha is None else repr(float(alpha)),
                            *row[1:], diverged, ripple])


def read_table(path):
    """Read a CSV written here into a dict of column name -> list of strings."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    header, body = rows[0], rows[1:]
    return {name: [r[j] for r in body] for j, name in enumerate(header)}


def read_curves(path):
    """Inverse of ``write_curves``: (msd_db, emse_db, mse_db), each (iterations, N)."""
    table = read_table(path)
    it = np.array(table["iteration"], dtype=int)
    node = np.array(table["node"], dtype=int) - 1
    shape = (it.max() + 1, node.max() + 1)
    out = []
    for col in ("msd_db", "emse_db", "mse_db"):
        arr = np.empty(shape)
        arr[it, node] = [parse_db(v) for v in table[col]]
        out.append(arr)
    return tuple(out)
