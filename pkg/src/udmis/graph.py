"""Core graph, geometric instance, and QUBO cost primitives.

Vertices are integers ``0..n-1``.  Graphs are value-semantic and immutable
after construction; adjacency is stored both as a canonical edge list and
as per-vertex neighbor bitmasks so that conflict tests in the solvers are
O(1) integer operations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

# Absolute tolerance for comparing a pairwise distance to the disk radius.
# Ties at the boundary count as edges, which keeps lattice instances (points
# at exact multiples of the spacing) deterministic.
DISTANCE_TOL = 1e-9


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with nonnegative per-vertex weights."""

    n: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]

    @cached_property
    def neighbor_masks(self) -> tuple[int, ...]:
        """Bitmask of neighbors per vertex (bit j set iff (v, j) is an edge)."""
        masks = [0] * self.n
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return tuple(masks)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Neighbor lists, ascending."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def total_weight(self) -> float:
        return float(sum(self.weights))

    @property
    def is_unit_weighted(self) -> bool:
        return all(w == 1.0 for w in self.weights)

    def with_weights(self, weights: Sequence[float]) -> "Graph":
        """Copy of this graph with a new weight vector."""
        return build_graph(self.n, self.edges, weights)


@dataclass(frozen=True)
class Assignment:
    """Binary assignment x in {0,1}^n, one bit per vertex."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        for b in self.bits:
            if b not in (0, 1):
                raise ValueError(f"assignment bit must be 0 or 1, got {b!r}")

    @classmethod
    def from_bitstring(cls, s: str) -> "Assignment":
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_set(cls, n: int, vertices: Iterable[int]) -> "Assignment":
        bits = [0] * n
        for v in vertices:
            bits[v] = 1
        return cls(tuple(bits))

    def to_bitstring(self) -> str:
        return "".join(str(b) for b in self.bits)

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True, eq=False)
class Instance:
    """A graph plus optional 2D geometry and generation provenance.

    ``positions`` are in micrometers for hardware-style layouts and in
    abstract units for the random box model; ``disk_radius`` uses the same
    units.  ``meta`` carries generator name, fill density, seed and layout
    identifier.
    """

    graph: Graph
    positions: Optional[tuple[tuple[float, float], ...]] = None
    disk_radius: Optional[float] = None
    meta: Mapping[str, object] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.graph.n

    def validate_geometry(self) -> None:
        """Check that edges are exactly the pairs within the disk radius."""
        if self.positions is None:
            return
        if len(self.positions) != self.graph.n:
            raise ValueError(
                f"{len(self.positions)} positions for {self.graph.n} vertices"
            )
        if self.disk_radius is None:
            raise ValueError("instance has positions but no disk_radius")
        expected = _disk_edges(self.positions, self.disk_radius)
        if set(expected) != set(self.graph.edges):
            missing = set(expected) - set(self.graph.edges)
            extra = set(self.graph.edges) - set(expected)
            raise ValueError(
                f"edge set inconsistent with geometry: missing={sorted(missing)[:5]} "
                f"extra={sorted(extra)[:5]}"
            )


def build_graph(
    n: int,
    edges: Iterable[Sequence[int]],
    weights: Optional[Sequence[float]] = None,
) -> Graph:
    """Construct a canonical graph: sorted, deduplicated edges, default unit weights.

    Raises ValueError naming the offending item on self-loops, out-of-range
    endpoints, or negative/non-finite weights.
    """
    if n < 0:
        raise ValueError(f"vertex count must be nonnegative, got {n}")
    canon: set[tuple[int, int]] = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise ValueError(f"self-loop ({i}, {j}) is not allowed")
        if not (0 <= i < n) or not (0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) has an endpoint outside 0..{n - 1}")
        canon.add((i, j) if i < j else (j, i))
    if weights is None:
        w = (1.0,) * n
    else:
        if len(weights) != n:
            raise ValueError(f"got {len(weights)} weights for {n} vertices")
        checked = []
        for k, x in enumerate(weights):
            xf = float(x)
            if not math.isfinite(xf) or xf < 0:
                raise ValueError(f"weight {x!r} at vertex {k} is negative or not finite")
            checked.append(xf)
        w = tuple(checked)
    return Graph(n=n, edges=tuple(sorted(canon)), weights=w)


def is_independent_set(g: Graph, s: Iterable[int]) -> bool:
    """True iff no edge of ``g`` has both endpoints in ``s``."""
    mask = 0
    for v in s:
        v = int(v)
        if not (0 <= v < g.n):
            raise ValueError(f"vertex {v} outside 0..{g.n - 1}")
        mask |= 1 << v
    masks = g.neighbor_masks
    m = mask
    while m:
        lsb = m & -m
        if masks[lsb.bit_length() - 1] & mask:
            return False
        m ^= lsb
    return True


def default_alpha(g: Graph) -> float:
    """Default QUBO penalty: twice the largest vertex weight.

    Any value above ``max_i w_i`` makes the unconstrained minimizer an
    independent set; the factor two gives margin.  Falls back to 1.0 for
    all-zero weights.
    """
    mx = max(g.weights, default=0.0)
    return 2.0 * mx if mx > 0 else 1.0


def qubo_cost(
    g: Graph,
    x: Assignment | Sequence[int],
    alpha: Optional[float] = None,
) -> float:
    """Penalty-form cost ``alpha * sum_{(i,j) in E} x_i x_j - sum_i w_i x_i``.

    For an independent set this equals minus the set weight.
    """
    bits = x.bits if isinstance(x, Assignment) else tuple(int(b) for b in x)
    if len(bits) != g.n:
        raise ValueError(f"assignment length {len(bits)} != vertex count {g.n}")
    a = default_alpha(g) if alpha is None else float(alpha)
    if a <= 0:
        raise ValueError(f"penalty alpha must be positive, got {a}")
    penalty = sum(1 for i, j in g.edges if bits[i] and bits[j])
    gain = sum(w for w, b in zip(g.weights, bits) if b)
    return a * penalty - gain


def set_weight(g: Graph, s: Iterable[int]) -> float:
    return float(sum(g.weights[v] for v in set(s)))


def bitstring_support(s: str) -> tuple[int, ...]:
    """Vertices selected by a bitstring (character i is vertex i)."""
    return tuple(i for i, c in enumerate(s) if c == "1")


def _disk_edges(
    points: Sequence[tuple[float, float]], radius: float
) -> list[tuple[int, int]]:
    """All pairs at Euclidean distance <= radius (+tolerance), via cell hashing."""
    cutoff2 = (radius + DISTANCE_TOL) ** 2
    cells: dict[tuple[int, int], list[int]] = {}
    keys = []
    for idx, (x, y) in enumerate(points):
        key = (int(math.floor(x / radius)), int(math.floor(y / radius)))
        cells.setdefault(key, []).append(idx)
        keys.append(key)
    edges: list[tuple[int, int]] = []
    for idx, (x, y) in enumerate(points):
        cx, cy = keys[idx]
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for jdx in cells.get((cx + dx, cy + dy), ()):
                    if jdx <= idx:
                        continue
                    ox, oy = points[jdx]
                    if (x - ox) ** 2 + (y - oy) ** 2 <= cutoff2:
                        edges.append((idx, jdx))
    return sorted(edges)


def unit_disk_from_points(
    points: Sequence[Sequence[float]],
    radius: float,
    weights: Optional[Sequence[float]] = None,
    meta: Optional[Mapping[str, object]] = None,
) -> Instance:
    """Unit-disk instance on the given points: edges at distance <= radius."""
    if radius <= 0:
        raise ValueError(f"disk radius must be positive, got {radius}")
    pts = []
    for k, p in enumerate(points):
        x, y = float(p[0]), float(p[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite coordinate {p!r} at index {k}")
        pts.append((x, y))
    edges = _disk_edges(pts, radius)
    g = build_graph(len(pts), edges, weights)
    return Instance(
        graph=g,
        positions=tuple(pts),
        disk_radius=float(radius),
        meta=dict(meta or {}),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def instance_to_json_dict(inst: Instance) -> dict:
    """Stable-key-order JSON representation of an instance."""
    g = inst.graph
    meta = dict(inst.meta)
    params: dict[str, object] = {
        "n": g.n,
        "rho": meta.get("rho"),
        "radius": inst.disk_radius,
    }
    if "spacing_um" in meta:
        params["spacing_um"] = meta["spacing_um"]
    obj: dict[str, object] = {
        "name": meta.get("name", _default_name(inst)),
        "seed": meta.get("seed"),
        "generator": meta.get("generator", "unknown"),
        "params": params,
    }
    if inst.positions is not None:
        obj["positions"] = [[x, y] for x, y in inst.positions]
    obj["edges"] = [[i, j] for i, j in g.edges]
    obj["weights"] = list(g.weights)
    return obj


def _default_name(inst: Instance) -> str:
    meta = dict(inst.meta)
    gen = meta.get("generator", "graph")
    seed = meta.get("seed")
    return f"{gen}-n{inst.graph.n}" + (f"-s{seed}" if seed is not None else "")


def instance_to_json(inst: Instance) -> str:
    return json.dumps(instance_to_json_dict(inst))


def instance_from_json_dict(obj: Mapping[str, object]) -> Instance:
    params = dict(obj.get("params") or {})
    n = int(params["n"])
    edges = [(int(i), int(j)) for i, j in obj.get("edges", [])]
    weights = obj.get("weights")
    g = build_graph(n, edges, weights)  # type: ignore[arg-type]
    positions = None
    if obj.get("positions") is not None:
        positions = tuple((float(x), float(y)) for x, y in obj["positions"])  # type: ignore[union-attr]
    radius = params.get("radius")
    meta: dict[str, object] = {
        "name": obj.get("name"),
        "generator": obj.get("generator"),
        "seed": obj.get("seed"),
    }
    if params.get("rho") is not None:
        meta["rho"] = params["rho"]
    if params.get("spacing_um") is not None:
        meta["spacing_um"] = params["spacing_um"]
    return Instance(
        graph=g,
        positions=positions,
        disk_radius=float(radius) if radius is not None else None,
        meta=meta,
    )


def instance_from_json(text: str) -> Instance:
    return instance_from_json_dict(json.loads(text))


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(instance_to_json(inst) + "\n", encoding="utf-8")


def load_instance(path: str | Path) -> Instance:
    return instance_from_json(Path(path).read_text(encoding="utf-8"))


def to_dimacs(g: Graph) -> str:
    """DIMACS-like export: 'p edge n m', 'e i j' (1-indexed), 'n i w' weight lines."""
    lines = [f"p edge {g.n} {g.num_edges}"]
    for i, j in g.edges:
        lines.append(f"e {i + 1} {j + 1}")
    if not g.is_unit_weighted:
        for i, w in enumerate(g.weights):
            lines.append(f"n {i + 1} {w!r}")
    return "\n".join(lines) + "\n"
