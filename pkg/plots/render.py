#!/usr/bin/env python3
"""Render sweep CSV output into figure panels.

Reads only the documented CSV schemas of the experiment harness (sweep
records, analyze reports, kernel grids, margin matrices, Bayes
baselines) and produces one image per invocation.

Usage:
    python3 plots/render.py --spec panel.cfg
    python3 plots/render.py --panel acc_vs_L --input-csv sweep.csv \
        --output fig.png [--overlay-csv theory.csv] [--bayes-csv bayes.csv]

The spec file uses `key = value` lines with the same keys as the long
flags (input_csv, panel, output, overlay_csv, bayes_csv, title).
"""

import argparse
import csv
import math
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PANELS = (
    "acc_vs_L",
    "acc_vs_d",
    "alignment_scatter",
    "bayes_overlay",
    "kernel_curve",
    "margin_heatmap",
    "richness_curve",
)

SWEEP_COLUMNS = {
    "acc_vs_L": ["gamma", "L", "seed", "best_test_acc"],
    "acc_vs_d": ["gamma", "d", "seed", "best_test_acc"],
    "bayes_overlay": ["gamma", "L", "sigma2", "seed", "best_test_acc"],
    "richness_curve": ["gamma", "seed", "richness_metric"],
}


class SchemaError(ValueError):
    """The CSV is missing columns the panel needs."""


def read_rows(path, required):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path} is missing columns: {', '.join(missing)}")
        return list(reader)


def seed_band(values):
    """Mean plus an empirical 95 percent band across seeds: 2.5/97.5
    percentiles with eight or more seeds, min/max (so labelled) below."""
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if arr.size >= 8:
        lo, hi = np.percentile(arr, [2.5, 97.5])
        label = "95% CI"
    else:
        lo, hi = arr.min(), arr.max()
        label = f"min-max band ({arr.size} seeds)"
    return mean, float(lo), float(hi), label


def _series_by(rows, x_col, series_cols, y_col):
    """Group rows into series keyed by `series_cols`, then collapse the
    per-seed values at each x into (mean, lo, hi)."""
    grouped = defaultdict(lambda: defaultdict(list))
    for row in rows:
        key = tuple(f"{c}={float(row[c]):g}" for c in series_cols)
        grouped[key][float(row[x_col])].append(float(row[y_col]))
    series = {}
    band_label = None
    for key, by_x in sorted(grouped.items()):
        xs = sorted(by_x)
        stats = [seed_band(by_x[x]) for x in xs]
        band_label = stats[0][3]
        series[", ".join(key)] = (
            np.array(xs),
            np.array([s[0] for s in stats]),
            np.array([s[1] for s in stats]),
            np.array([s[2] for s in stats]),
        )
    return series, band_label


def _line_panel(ax, rows, x_col, series_cols, logx=False):
    series, band_label = _series_by(rows, x_col, series_cols, "best_test_acc")
    for name, (xs, mean, lo, hi) in series.items():
        (line,) = ax.plot(xs, mean, marker="o", label=name)
        ax.fill_between(xs, lo, hi, alpha=0.2, color=line.get_color())
    if logx:
        ax.set_xscale("log", base=2)
    ax.set_xlabel(x_col)
    ax.set_ylabel("best test accuracy")
    ax.set_ylim(0.0, 1.05)
    return band_label


def panel_acc_vs_L(ax, args):
    rows = read_rows(args.input_csv, SWEEP_COLUMNS["acc_vs_L"])
    band = _line_panel(ax, rows, "L", ["gamma"], logx=True)
    if args.overlay_csv:
        orows = read_rows(args.overlay_csv, ["L", "predicted_acc"])
        xs = [float(r["L"]) for r in orows]
        ys = [float(r["predicted_acc"]) for r in orows]
        ax.plot(xs, ys, linestyle="--", color="black", label="theory")
    ax.legend(title=band, fontsize=8)


def panel_acc_vs_d(ax, args):
    rows = read_rows(args.input_csv, SWEEP_COLUMNS["acc_vs_d"])
    band = _line_panel(ax, rows, "d", ["gamma"], logx=True)
    ax.legend(title=band, fontsize=8)


def panel_bayes_overlay(ax, args):
    rows = read_rows(args.input_csv, SWEEP_COLUMNS["bayes_overlay"])
    series, band = _series_by(rows, "L", ["gamma", "sigma2"], "best_test_acc")
    for name, (xs, mean, lo, hi) in series.items():
        (line,) = ax.plot(xs, mean, marker="o", label=name)
        ax.fill_between(xs, lo, hi, alpha=0.2, color=line.get_color())
    if args.bayes_csv:
        brows = read_rows(args.bayes_csv, ["prior", "sigma2", "accuracy"])
        for row in brows:
            ax.axhline(
                float(row["accuracy"]),
                linestyle="--",
                alpha=0.7,
                label=f"bayes {row['prior']} sigma2={float(row['sigma2']):g}",
            )
    ax.set_xscale("log", base=2)
    ax.set_xlabel("L")
    ax.set_ylabel("best test accuracy")
    ax.legend(title=band, fontsize=7)


def panel_alignment_scatter(ax, args):
    rows = read_rows(args.input_csv, ["unit", "a", "cos_align"])
    pts = [
        (float(r["a"]), float(r["cos_align"]))
        for r in rows
        if r["unit"] != "summary" and not math.isnan(float(r["cos_align"]))
    ]
    if not pts:
        raise SchemaError(f"{args.input_csv} holds no per-unit alignment rows")
    a, align = zip(*pts)
    ax.scatter(a, align, s=12, alpha=0.6)
    ax.axhline(0.0, color="gray", linewidth=0.5)
    ax.axvline(0.0, color="gray", linewidth=0.5)
    ax.set_xlabel("readout weight")
    ax.set_ylabel("hidden weight alignment")
    ax.set_ylim(-1.05, 1.05)


def panel_kernel_curve(ax, args):
    rows = read_rows(args.input_csv, ["u", "K"])
    xs = [float(r["u"]) for r in rows]
    ys = [float(r["K"]) for r in rows]
    ax.plot(xs, ys)
    ax.set_xlabel("u")
    ax.set_ylabel("K(u)")


def panel_margin_heatmap(ax, args):
    matrix = np.loadtxt(args.input_csv, delimiter=",")
    if matrix.ndim != 2:
        raise SchemaError(f"{args.input_csv} does not hold a 2-D matrix")
    im = ax.imshow(matrix, cmap="RdBu_r", vmin=-1.2, vmax=1.2)
    ax.figure.colorbar(im, ax=ax, shrink=0.8)
    ax.set_xlabel("input index")
    ax.set_ylabel("input index")


def panel_richness_curve(ax, args):
    rows = read_rows(args.input_csv, SWEEP_COLUMNS["richness_curve"])
    by_gamma = defaultdict(list)
    for row in rows:
        by_gamma[float(row["gamma"])].append(float(row["richness_metric"]))
    xs = sorted(by_gamma)
    stats = [seed_band(by_gamma[x]) for x in xs]
    mean = [s[0] for s in stats]
    lo = [s[1] for s in stats]
    hi = [s[2] for s in stats]
    ax.plot(xs, mean, marker="o")
    ax.fill_between(xs, lo, hi, alpha=0.2)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("gamma")
    ax.set_ylabel("relative activation change")
    ax.set_title(stats[0][3], fontsize=8)


PANEL_FUNCS = {
    "acc_vs_L": panel_acc_vs_L,
    "acc_vs_d": panel_acc_vs_d,
    "alignment_scatter": panel_alignment_scatter,
    "bayes_overlay": panel_bayes_overlay,
    "kernel_curve": panel_kernel_curve,
    "margin_heatmap": panel_margin_heatmap,
    "richness_curve": panel_richness_curve,
}


def render(args):
    if args.panel not in PANEL_FUNCS:
        raise ValueError(f"unknown panel {args.panel!r}; have {PANELS}")
    fig, ax = plt.subplots(figsize=(5.0, 3.6), dpi=120)
    PANEL_FUNCS[args.panel](ax, args)
    if args.title:
        ax.set_title(args.title, fontsize=9)
    fig.tight_layout()
    fig.savefig(args.output)
    plt.close(fig)
    return args.output


def load_spec(path):
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    return values


def build_parser():
    parser = argparse.ArgumentParser(description="render eqlab CSVs into figures")
    parser.add_argument("--spec", default="", help="key = value spec file")
    parser.add_argument("--panel", default="", choices=("",) + PANELS)
    parser.add_argument("--input-csv", dest="input_csv", default="")
    parser.add_argument("--output", default="")
    parser.add_argument("--overlay-csv", dest="overlay_csv", default="")
    parser.add_argument("--bayes-csv", dest="bayes_csv", default="")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.spec:
            spec = load_spec(args.spec)
            for key in ("panel", "input_csv", "output", "overlay_csv", "bayes_csv", "title"):
                if key in spec and not getattr(args, key):
                    setattr(args, key, spec[key])
        if not (args.panel and args.input_csv and args.output):
            raise ValueError("need --panel, --input-csv and --output (or a spec file)")
        render(args)
        print(f"wrote {args.output}")
        return 0
    except (ValueError, OSError) as exc:
        print(f"render: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
