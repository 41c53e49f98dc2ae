"""Sweep orchestration: one metric row per (instance, scheme) cell.

Runs are deterministic for a fixed config and master seed regardless of the
worker count: every row derives its own seed from a SHA-256 split of the
master seed and the row key, rows are computed independently, and the CSV is
emitted in sorted row-key order with frozen columns and float formatting
(17 significant digits).
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

import numpy as np

from . import quantum
from .generators import (
    NATIVE_RADIUS_FACTOR,
    kings_lattice,
    random_udg_box,
    rewire,
    sample_native_instance,
    triangular_layout,
)
from .graph import Instance, instance_from_json, instance_to_json, save_instance
from .hardness import component_stats, geometric_density, minfill_treewidth, thickness
from .metrics import p_mis, truncated_avg_gap, tts_q
from .quantum import (
    NoiseModel,
    apply_readout_noise,
    build_hamiltonian,
    default_schedule,
    evolve,
    mitigate_readout,
    repair_bitstrings,
    sample_distribution,
)
from .solver import solve_bb
from .weighting import WeightScheme, apply_scheme

CACHE_ENV_VAR = "UDMIS_CACHE_DIR"

CSV_COLUMNS = [
    "instance_id",
    "generator",
    "n",
    "rho",
    "rewire_fraction",
    "scheme",
    "seed",
    "edges",
    "ticks",
    "bb_nodes",
    "optimal",
    "optimum",
    "lp_root",
    "root_gap_pct",
    "treewidth_est",
    "geometric_density",
    "thickness_est",
    "largest_component",
    "p_mis",
    "tts_q",
    "avg_gap",
    "truncated_gaps",
]

DEFAULT_KEEP_FRACTIONS = (1.0, 0.5, 0.2)


def derive_seed(master_seed: int, *parts: object) -> int:
    """Stable 63-bit seed from the master seed and a row key."""
    text = "|".join([str(int(master_seed))] + [repr(p) for p in parts])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & (2**63 - 1)


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


@dataclass
class SweepConfig:
    master_seed: int
    generator: str
    schemes: tuple[str, ...]
    replicates: int
    grid_n: tuple[int, ...] = ()
    grid_rho: tuple[float, ...] = ()
    kings_width: int = 0
    kings_height: int = 0
    fractions: tuple[float, ...] = ()
    layout_traps: int = 200
    layout_spacing: float = 5.0
    radius_factor: float = NATIVE_RADIUS_FACTOR
    delta_bar: float = 1000.0
    solver_budget_ticks: Optional[int] = None
    analyze: bool = False
    analyze_orientations: int = 36
    keep_fractions: tuple[float, ...] = DEFAULT_KEEP_FRACTIONS
    quantum_enabled: bool = False
    quantum_max_n: int = 14
    quantum_shots: int = 1000
    quantum_dt_us: float = quantum.DEFAULT_DT_US
    quantum_duration_us: float = quantum.DEFAULT_DURATION_US
    quantum_noise_p: float = 0.0
    quantum_noise_q: float = 0.0
    quantum_mitigate: bool = False
    quantum_repair: bool = True

    @classmethod
    def from_json_dict(cls, obj: Mapping[str, Any]) -> "SweepConfig":
        gen = obj["generator"]
        if gen not in ("native", "box", "kings_rewire"):
            raise ValueError(f"unknown generator {gen!r}")
        layout = dict(obj.get("layout") or {})
        grid = dict(obj.get("grid") or {})
        kings = dict(obj.get("kings") or {})
        analyze = dict(obj.get("analyze") or {})
        q = dict(obj.get("quantum") or {})
        noise = dict(q.get("noise") or {})
        return cls(
            master_seed=int(obj["master_seed"]),
            generator=str(gen),
            schemes=tuple(obj.get("schemes") or ("unweighted",)),
            replicates=int(obj.get("replicates", 1)),
            grid_n=tuple(int(x) for x in grid.get("n", ())),
            grid_rho=tuple(float(x) for x in grid.get("rho", ())),
            kings_width=int(kings.get("width", 0)),
            kings_height=int(kings.get("height", 0)),
            fractions=tuple(float(x) for x in kings.get("fractions", ())),
            layout_traps=int(layout.get("n_traps", 200)),
            layout_spacing=float(layout.get("spacing_um", 5.0)),
            radius_factor=float(obj.get("radius_factor", NATIVE_RADIUS_FACTOR)),
            delta_bar=float(obj.get("delta_bar", 1000.0)),
            solver_budget_ticks=(
                int(obj["solver_budget_ticks"])
                if obj.get("solver_budget_ticks") is not None
                else None
            ),
            analyze=bool(analyze.get("enabled", False)),
            analyze_orientations=int(analyze.get("orientations", 36)),
            keep_fractions=tuple(
                float(x) for x in obj.get("keep_fractions", DEFAULT_KEEP_FRACTIONS)
            ),
            quantum_enabled=bool(q.get("enabled", False)),
            quantum_max_n=int(q.get("max_n", 14)),
            quantum_shots=int(q.get("shots", 1000)),
            quantum_dt_us=float(q.get("dt_us", quantum.DEFAULT_DT_US)),
            quantum_duration_us=float(q.get("duration_us", quantum.DEFAULT_DURATION_US)),
            quantum_noise_p=float(noise.get("p", 0.0)),
            quantum_noise_q=float(noise.get("q", 0.0)),
            quantum_mitigate=bool(q.get("mitigate", False)),
            quantum_repair=bool(q.get("repair", True)),
        )

    def cells(self) -> list[dict[str, Any]]:
        """Sorted task list: one entry per (cell, scheme, replicate)."""
        tasks = []
        if self.generator in ("native", "box"):
            axes = [(n, rho) for n in self.grid_n for rho in self.grid_rho]
        else:
            nn = self.kings_width * self.kings_height
            axes = [(nn, f) for f in self.fractions]
        for n, x in axes:
            for scheme in self.schemes:
                for rep in range(self.replicates):
                    seed = derive_seed(self.master_seed, self.generator, n, x, scheme, rep)
                    tasks.append(
                        {
                            "generator": self.generator,
                            "n": n,
                            "x": x,
                            "scheme": scheme,
                            "replicate": rep,
                            "seed": seed,
                            "config": self,
                        }
                    )
        tasks.sort(key=lambda t: (t["generator"], t["n"], t["x"], t["scheme"], t["replicate"]))
        return tasks


def _cache_path(key: str) -> Optional[Path]:
    root = os.environ.get(CACHE_ENV_VAR)
    if not root:
        return None
    digest = hashlib.sha256(key.encode("utf-8")).hexdigest()[:24]
    return Path(root) / f"inst-{digest}.json"


def generate_cell_instance(task: Mapping[str, Any]) -> tuple[Instance, Optional[float]]:
    """Instance for one task; returns (instance, rewire_fraction or None)."""
    cfg: SweepConfig = task["config"]
    gen = task["generator"]
    n = task["n"]
    x = task["x"]
    seed = task["seed"]
    key = f"{gen}|{n}|{x!r}|{seed}|{cfg.layout_traps}|{cfg.layout_spacing}|{cfg.radius_factor}"
    cache = _cache_path(key)
    if cache is not None and cache.exists():
        inst = instance_from_json(cache.read_text(encoding="utf-8"))
        frac = inst.meta.get("rewire_fraction")
        return inst, (float(frac) if frac is not None else None)
    if gen == "native":
        layout = triangular_layout(cfg.layout_traps, cfg.layout_spacing)
        inst = sample_native_instance(
            layout, n, x, seed, radius=cfg.radius_factor * cfg.layout_spacing
        )
        frac = None
    elif gen == "box":
        inst = random_udg_box(n, x, seed)
        frac = None
    elif gen == "kings_rewire":
        base = kings_lattice(cfg.kings_width, cfg.kings_height)
        g = rewire(base.graph, x, seed)
        if x == 0.0:
            inst = base
        else:
            inst = Instance(
                graph=g,
                positions=None,
                disk_radius=None,
                meta={"generator": "kings_rewire", "seed": seed, "rewire_fraction": x},
            )
        frac = x
    else:  # pragma: no cover
        raise ValueError(f"unknown generator {gen!r}")
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        meta = dict(inst.meta)
        if frac is not None:
            meta["rewire_fraction"] = frac
        save_instance(
            Instance(inst.graph, inst.positions, inst.disk_radius, meta), cache
        )
    return inst, frac


def compute_row(task: Mapping[str, Any]) -> dict[str, Any]:
    """One benchmark row: generate, weight, solve, optionally analyze + anneal."""
    cfg: SweepConfig = task["config"]
    inst, frac = generate_cell_instance(task)
    scheme_name = task["scheme"]
    scheme = WeightScheme(
        kind=scheme_name,
        delta_bar=cfg.delta_bar,
        seed=derive_seed(cfg.master_seed, "weights", task["seed"]),
    )
    g = apply_scheme(inst.graph, scheme)
    report = solve_bb(g, budget=cfg.solver_budget_ticks)

    row: dict[str, Any] = {
        "instance_id": f"{task['generator']}-n{task['n']}-x{task['x']:g}-r{task['replicate']}",
        "generator": task["generator"],
        "n": g.n,
        "rho": task["x"] if task["generator"] in ("native", "box") else None,
        "rewire_fraction": frac,
        "scheme": scheme_name,
        "seed": task["seed"],
        "edges": g.num_edges,
        "ticks": report.ticks,
        "bb_nodes": report.bb_nodes,
        "optimal": report.optimal,
        "optimum": report.optimum,
        "lp_root": report.lp_root,
        "root_gap_pct": report.root_gap_pct,
        "treewidth_est": None,
        "geometric_density": None,
        "thickness_est": None,
        "largest_component": None,
        "p_mis": None,
        "tts_q": None,
        "avg_gap": None,
        "truncated_gaps": None,
    }

    if cfg.analyze:
        row["treewidth_est"] = minfill_treewidth(g).width
        row["largest_component"] = component_stats(g)[0] if g.n else 0
        if inst.positions is not None:
            row["geometric_density"] = geometric_density(inst, cfg.analyze_orientations)
            row["thickness_est"] = thickness(inst, cfg.analyze_orientations)

    if (
        cfg.quantum_enabled
        and inst.positions is not None
        and g.n <= cfg.quantum_max_n
    ):
        weighted_inst = Instance(g, inst.positions, inst.disk_radius, inst.meta)
        sched = default_schedule(duration_us=cfg.quantum_duration_us)
        ham = build_hamiltonian(weighted_inst, sched)
        psi = evolve(ham, dt=cfg.quantum_dt_us)
        dist = np.abs(psi) ** 2
        dist = dist / dist.sum()
        if cfg.quantum_noise_p > 0 or cfg.quantum_noise_q > 0:
            nm = NoiseModel(cfg.quantum_noise_p, cfg.quantum_noise_q)
            dist = apply_readout_noise(dist, nm)
            qseed = derive_seed(cfg.master_seed, "shots", task["seed"])
            samples = sample_distribution(dist, cfg.quantum_shots, qseed)
            if cfg.quantum_mitigate:
                emp = np.zeros(len(dist))
                for s, c in samples.counts.items():
                    emp[int(s, 2)] = c / samples.total_shots
                _, clipped = mitigate_readout(emp, nm)
                samples = sample_distribution(
                    clipped, cfg.quantum_shots, derive_seed(cfg.master_seed, "mitig", task["seed"])
                )
        else:
            qseed = derive_seed(cfg.master_seed, "shots", task["seed"])
            samples = sample_distribution(dist, cfg.quantum_shots, qseed)
        if cfg.quantum_repair:
            samples = repair_bitstrings(samples, g)
        p = p_mis(samples, g, report.optimum)
        row["p_mis"] = p
        row["tts_q"] = tts_q(min(p, 0.99))
        gaps = {}
        for kf in sorted(cfg.keep_fractions):
            try:
                gaps[f"{kf:g}"] = truncated_avg_gap(samples, g, report.optimum, kf)
            except ValueError:
                gaps[f"{kf:g}"] = None
        row["avg_gap"] = gaps.get("1")
        row["truncated_gaps"] = json.dumps(gaps, sort_keys=False)
    return row


def run_benchmark(
    config: SweepConfig, out_path: str | Path, workers: int = 1
) -> int:
    """Run every cell and stream rows to ``out_path`` in deterministic order.

    Returns the number of rows written.  Rows are flushed as they complete,
    in sorted row-key order, so partial results survive interruption.
    """
    tasks = config.cells()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    with open(out_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        f.flush()
        if workers <= 1:
            rows: Iterable[dict[str, Any]] = (compute_row(t) for t in tasks)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
                f.flush()
                written += 1
        else:
            with Pool(processes=workers) as pool:
                for row in pool.imap(compute_row, tasks, chunksize=1):
                    writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
                    f.flush()
                    written += 1
    return written


def load_config(path: str | Path) -> SweepConfig:
    return SweepConfig.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))
