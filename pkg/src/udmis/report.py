"""Plot-ready aggregations of benchmark results, with rendered figures.

Each figure kind reads the benchmark CSV, writes a long-format CSV of the
aggregated data (gnuplot-friendly columns), and renders a matplotlib PNG
next to it with the same stem.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

FIGURE_KINDS = (
    "fig1c",  # median/mean ticks over the (n, rho) grid
    "fig1d",  # median tts_q over the (n, rho) grid
    "fig2",   # median ticks per (n, treewidth estimate)
    "fig3a",  # mean ticks per (scheme, n)
    "fig3b",  # mean root gap per (scheme, n)
    "figA2",  # median ticks and treewidth per rewiring fraction
    "fig4b",  # mean truncated gap per keep fraction, grouped by (n, rho)
)


def _read_rows(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def _float(row: dict[str, str], key: str) -> float | None:
    s = row.get(key, "")
    if s is None or s == "":
        return None
    return float(s)


def _median(values: list[float]) -> float:
    return float(statistics.median(values))


def _mean(values: list[float]) -> float:
    return float(statistics.fmean(values))


def _write_csv(path: Path, header: list[str], rows: list[list[object]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)


def _group(rows, keys, value):
    grouped: dict[tuple, list[float]] = defaultdict(list)
    for row in rows:
        v = _float(row, value)
        if v is None or math.isinf(v):
            continue
        key = tuple(row[k] for k in keys)
        if any(k == "" for k in key):
            continue
        grouped[key].append(v)
    return grouped


def _heatmap(out_png: Path, points, title: str, value_label: str) -> None:
    ns = sorted({n for n, _, _ in points})
    rhos = sorted({r for _, r, _ in points})
    grid = [[math.nan] * len(rhos) for _ in ns]
    for n, r, v in points:
        grid[ns.index(n)][rhos.index(r)] = v
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh([0] + [i + 1 for i in range(len(rhos))],
                         [0] + [i + 1 for i in range(len(ns))],
                         grid, shading="flat", cmap="viridis")
    ax.set_xticks([i + 0.5 for i in range(len(rhos))], [f"{r:g}" for r in rhos])
    ax.set_yticks([i + 0.5 for i in range(len(ns))], [f"{n:g}" for n in ns])
    ax.set_xlabel("fill density")
    ax.set_ylabel("N")
    ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label=value_label)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def _lines(out_png: Path, series, xlabel, ylabel, title, logy=False) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, xs, ys in series:
        ax.plot(xs, ys, marker="o", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logy:
        ax.set_yscale("log")
    ax.set_title(title)
    if len(series) > 1 or (series and series[0][0]):
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def make_report(results_csv: str | Path, figure: str, out_csv: str | Path) -> Path:
    """Aggregate ``results_csv`` for one figure kind.

    Writes the long-format CSV to ``out_csv`` and a PNG with the same stem;
    returns the PNG path.
    """
    if figure not in FIGURE_KINDS:
        raise ValueError(f"unknown figure {figure!r}; expected one of {FIGURE_KINDS}")
    rows = _read_rows(results_csv)
    out_csv = Path(out_csv)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    out_png = out_csv.with_suffix(".png")

    if figure in ("fig1c", "fig1d"):
        value = "ticks" if figure == "fig1c" else "tts_q"
        grouped = _group(rows, ("n", "rho"), value)
        table = []
        points = []
        for (n, rho), vals in sorted(grouped.items(), key=lambda kv: (float(kv[0][0]), float(kv[0][1]))):
            med, mean = _median(vals), _mean(vals)
            table.append([n, rho, _fmtv(med), _fmtv(mean), len(vals)])
            points.append((float(n), float(rho), med))
        _write_csv(out_csv, ["n", "rho", f"median_{value}", f"mean_{value}", "count"], table)
        _heatmap(out_png, points, f"median {value} over the (N, rho) grid", value)
    elif figure == "fig2":
        grouped = _group(rows, ("n", "treewidth_est"), "ticks")
        table = []
        series_pts = defaultdict(list)
        for (n, tw), vals in sorted(grouped.items(), key=lambda kv: (float(kv[0][0]), float(kv[0][1]))):
            med = _median(vals)
            table.append([n, tw, _fmtv(med), len(vals)])
            series_pts[n].append((float(tw), med))
        _write_csv(out_csv, ["n", "treewidth_est", "median_ticks", "count"], table)
        series = [
            (f"N={n}", [x for x, _ in pts], [y for _, y in pts])
            for n, pts in sorted(series_pts.items(), key=lambda kv: float(kv[0]))
        ]
        _lines(out_png, series, "min-fill treewidth", "median ticks",
               "solver cost vs treewidth estimate", logy=True)
    elif figure in ("fig3a", "fig3b"):
        value = "ticks" if figure == "fig3a" else "root_gap_pct"
        grouped = _group(rows, ("scheme", "n"), value)
        table = []
        series_pts = defaultdict(list)
        for (scheme, n), vals in sorted(grouped.items(), key=lambda kv: (kv[0][0], float(kv[0][1]))):
            mean = _mean(vals)
            table.append([scheme, n, _fmtv(mean), len(vals)])
            series_pts[scheme].append((float(n), mean))
        _write_csv(out_csv, ["scheme", "n", f"mean_{value}", "count"], table)
        series = [
            (scheme, [x for x, _ in pts], [y for _, y in pts])
            for scheme, pts in sorted(series_pts.items())
        ]
        _lines(out_png, series, "N", f"mean {value}",
               f"weighting schemes: {value}", logy=figure == "fig3a")
    elif figure == "figA2":
        ticks = _group(rows, ("rewire_fraction",), "ticks")
        widths = _group(rows, ("rewire_fraction",), "treewidth_est")
        table = []
        xs, med_ticks, med_w = [], [], []
        for (frac,), vals in sorted(ticks.items(), key=lambda kv: float(kv[0][0])):
            tw_vals = widths.get((frac,), [])
            mt = _median(vals)
            mw = _median(tw_vals) if tw_vals else None
            table.append([frac, _fmtv(mt), _fmtv(mw) if mw is not None else "", len(vals)])
            xs.append(float(frac))
            med_ticks.append(mt)
            med_w.append(mw)
        _write_csv(out_csv, ["rewire_fraction", "median_ticks", "median_treewidth", "count"], table)
        series = [("median ticks", xs, med_ticks)]
        if all(w is not None for w in med_w):
            series.append(("median treewidth", xs, med_w))
        _lines(out_png, series, "rewired edge fraction", "value",
               "rewiring sweep", logy=True)
    elif figure == "fig4b":
        curves: dict[tuple[str, str], dict[float, list[float]]] = defaultdict(lambda: defaultdict(list))
        for row in rows:
            blob = row.get("truncated_gaps", "")
            if not blob:
                continue
            key = (row["n"], row.get("rho", ""))
            for kf, val in json.loads(blob).items():
                if val is not None:
                    curves[key][float(kf)].append(float(val))
        table = []
        series = []
        for (n, rho), by_kf in sorted(curves.items(), key=lambda kv: (float(kv[0][0]), kv[0][1])):
            xs, ys = [], []
            for kf in sorted(by_kf):
                mean = _mean(by_kf[kf])
                table.append([n, rho, _fmtv(kf), _fmtv(mean), len(by_kf[kf])])
                xs.append(kf)
                ys.append(mean)
            series.append((f"N={n} rho={rho}", xs, ys))
        _write_csv(out_csv, ["n", "rho", "keep_fraction", "mean_gap", "count"], table)
        _lines(out_png, series, "kept fraction of best-cost shots", "mean gap",
               "truncated average gap")
    return out_png


def _fmtv(v: float) -> str:
    return format(float(v), ".17g")
