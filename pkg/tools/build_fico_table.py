"""Build the bundled two-group credit-score profile table.

Input is the aggregate TransRisk data (score CDF, default rate and group
totals by race) as distributed with the ``responsibly`` package:

    pip download responsibly --no-deps -d /tmp/resp
    python tools/build_fico_table.py <dir with the three CSVs>

Group a is non-Hispanic white, group b is black.  Each CDF increment is
treated as the mass of the score where it ends; scores (0-100) are resampled
onto a uniform half-point grid and mapped to 300-850.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from fairthresh.ingest import ProfileTable, fico_table_path, save_profile_table

COLUMNS = {"a": "Non- Hispanic white", "b": "Black"}


def read(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return rows


def column(rows, name):
    return np.array([float(r[name]) for r in rows])


def build(src: Path) -> ProfileTable:
    cdf_rows = read(src / "transrisk_cdf_by_race_ssa.csv")
    perf_rows = read(src / "transrisk_performance_by_race_ssa.csv")
    totals = read(src / "totals.csv")[0]
    raw = np.linspace(0.0, 100.0, 201)
    out = {}
    for g, name in COLUMNS.items():
        scores = column(cdf_rows, "Score")
        # each CDF increment is the probability mass of the score it ends at
        pmf = np.diff(np.r_[0.0, column(cdf_rows, name) / 100.0])
        gaps = np.diff(scores)
        weight = np.r_[gaps[0] / 2, (gaps[1:] + gaps[:-1]) / 2, gaps[-1] / 2]
        dens = np.interp(raw, scores, pmf / weight)
        repay = 1.0 - np.interp(raw, column(perf_rows, "Score"), column(perf_rows, name) / 100.0)
        out[f"gamma_{g}"] = np.clip(repay, 0.0, 1.0)
        out[f"density_{g}"] = dens / np.trapezoid(dens, 300.0 + 5.5 * raw)
    na, nb = float(totals[COLUMNS["a"]]), float(totals[COLUMNS["b"]])
    return ProfileTable(
        300.0 + 5.5 * raw,
        out["gamma_a"],
        out["gamma_b"],
        out["density_a"],
        out["density_b"],
        n_a=na / (na + nb),
        n_b=nb / (na + nb),
        u_minus_over_u_plus=10.0,
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", type=Path)
    ap.add_argument("--out", type=Path, default=fico_table_path())
    args = ap.parse_args()
    table = build(args.source)
    save_profile_table(table, args.out)
    print(f"wrote {args.out}: alpha_a={table.alpha_a:.4f} alpha_b={table.alpha_b:.4f} n_b={table.n_b:.4f}")


if __name__ == "__main__":
    main()
