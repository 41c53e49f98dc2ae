"""Instance generators.

Covers the hardware-style pipeline (regular triangular trap layout with a
seeded sub-sampling of the central traps), the random box model, King's
lattice grids, and random edge rewiring that morphs a structured graph
toward an unstructured random one while preserving the edge count.

Every generator takes an explicit seed and draws from numpy's PCG64
(``numpy.random.default_rng``), so instances are bit-reproducible across
platforms and runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph, Instance, build_graph, unit_disk_from_points

# Unit-disk radius for native layouts, as a multiple of the trap spacing.
# Strictly between the nearest-neighbor distance (1.0) and the next-nearest
# distance (sqrt(3)) on a triangular lattice, so the graph connects exactly
# nearest neighbors.
NATIVE_RADIUS_FACTOR = 1.3

DEFAULT_TRAP_COUNT = 200
DEFAULT_SPACING_UM = 5.0


@dataclass(frozen=True)
class Layout:
    """A regular trap layout: positions in micrometers plus its spacing."""

    trap_positions: tuple[tuple[float, float], ...]
    spacing: float
    kind: str

    @property
    def n_traps(self) -> int:
        return len(self.trap_positions)

    @property
    def ident(self) -> str:
        return f"{self.kind}-{self.n_traps}@{self.spacing:g}um"


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def triangular_layout(
    n_traps: int = DEFAULT_TRAP_COUNT, spacing: float = DEFAULT_SPACING_UM
) -> Layout:
    """Triangular lattice of ``n_traps`` traps, ordered outward from the center.

    Lattice points are ranked by distance to the lattice center, ties broken
    by polar angle then generation index.  Distances are compared through the
    exact integer norm i*i + i*j + j*j of the lattice coordinates, so the
    ordering is immune to float rounding on rings of equal radius.
    """
    if n_traps < 1:
        raise ValueError(f"n_traps must be >= 1, got {n_traps}")
    if spacing <= 0:
        raise ValueError(f"spacing must be positive, got {spacing}")
    half = math.sqrt(3.0) / 2.0
    reach = int(math.ceil(math.sqrt(float(n_traps)))) + 2
    ranked = []
    idx = 0
    for i in range(-reach, reach + 1):
        for j in range(-reach, reach + 1):
            x = (i + 0.5 * j) * spacing
            y = j * half * spacing
            r2 = i * i + i * j + j * j
            ang = math.atan2(y, x) % (2.0 * math.pi)
            ranked.append((r2, ang, idx, x, y))
            idx += 1
    ranked.sort(key=lambda t: (t[0], t[1], t[2]))
    if len(ranked) < n_traps:  # pragma: no cover - reach margin guards this
        raise ValueError(f"internal patch too small for {n_traps} traps")
    pts = tuple((t[3], t[4]) for t in ranked[:n_traps])
    return Layout(trap_positions=pts, spacing=float(spacing), kind="triangular")


def _central_candidates(layout: Layout, count: int) -> list[int]:
    """Indices of the ``count`` traps closest to the centroid of the layout.

    Ties by polar angle around the centroid, then by trap index, so the
    candidate set is deterministic.
    """
    pts = layout.trap_positions
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    keyed = []
    for k, (x, y) in enumerate(pts):
        dx, dy = x - cx, y - cy
        keyed.append((dx * dx + dy * dy, math.atan2(dy, dx) % (2.0 * math.pi), k))
    keyed.sort()
    return [k for _, _, k in keyed[:count]]


def sample_native_instance(
    layout: Layout,
    n: int,
    rho: float,
    seed: int,
    radius: float | None = None,
) -> Instance:
    """Sample ``n`` occupied traps out of the ``round(n / rho)`` central ones.

    The fill density ``rho`` is the fraction of candidate traps occupied.
    The disk radius defaults to ``NATIVE_RADIUS_FACTOR * spacing`` so the
    graph connects exactly nearest neighbors of the lattice.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not (0.0 < rho <= 1.0):
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    num_candidates = _round_half_up(n / rho)
    if num_candidates > layout.n_traps:
        raise ValueError(
            f"need {num_candidates} candidate traps for n={n}, rho={rho}, "
            f"but layout has only {layout.n_traps}"
        )
    candidates = _central_candidates(layout, num_candidates)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(num_candidates, size=n, replace=False)
    chosen_traps = sorted(candidates[int(c)] for c in chosen)
    pts = [layout.trap_positions[t] for t in chosen_traps]
    r = NATIVE_RADIUS_FACTOR * layout.spacing if radius is None else float(radius)
    return unit_disk_from_points(
        pts,
        r,
        meta={
            "generator": "native",
            "rho": float(rho),
            "seed": int(seed),
            "spacing_um": layout.spacing,
            "layout": layout.ident,
        },
    )


def random_udg_box(n: int, rho: float, seed: int) -> Instance:
    """``n`` uniform points in a box of side sqrt(n / rho), unit disk radius."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    side = math.sqrt(n / rho)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, side, size=(n, 2))
    return unit_disk_from_points(
        [(float(x), float(y)) for x, y in pts],
        1.0,
        meta={"generator": "box", "rho": float(rho), "seed": int(seed)},
    )


def kings_lattice(width: int, height: int) -> Instance:
    """King's-graph grid: unit-spaced points, edges at Chebyshev distance 1.

    Equivalently a unit-disk graph with radius sqrt(2) on the integer grid.
    """
    if width < 1 or height < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {width}x{height}")
    pts = [(float(x), float(y)) for y in range(height) for x in range(width)]
    return unit_disk_from_points(
        pts,
        math.sqrt(2.0),
        meta={"generator": "kings", "width": width, "height": height},
    )


def rewire(g: Graph, fraction: float, seed: int) -> Graph:
    """Replace ``round(fraction * |E|)`` edges by uniform random non-edges.

    The edges to drop are chosen without replacement; replacements are drawn
    one at a time, rejecting self-loops and pairs already present, so the
    edge count is preserved exactly.  Geometry does not survive rewiring, so
    the result is a plain graph.
    """
    if not (0.0 <= fraction <= 1.0):
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    m = g.num_edges
    k = _round_half_up(fraction * m)
    if k == 0:
        return g
    n = g.n
    max_pairs = n * (n - 1) // 2
    rng = np.random.default_rng(seed)
    drop = rng.choice(m, size=k, replace=False)
    edge_set = set(g.edges)
    for d in sorted(int(x) for x in drop):
        edge_set.discard(g.edges[d])
    for _ in range(k):
        if len(edge_set) >= max_pairs:
            raise ValueError("graph too dense to place a replacement edge")
        pair = None
        for _attempt in range(10_000):
            i = int(rng.integers(n))
            j = int(rng.integers(n))
            if i == j:
                continue
            cand = (i, j) if i < j else (j, i)
            if cand in edge_set:
                continue
            pair = cand
            break
        if pair is None:
            # near-complete graph: enumerate the free pairs instead
            free = [
                (a, b)
                for a in range(n)
                for b in range(a + 1, n)
                if (a, b) not in edge_set
            ]
            pair = free[int(rng.integers(len(free)))]
        edge_set.add(pair)
    return build_graph(n, sorted(edge_set), g.weights)
