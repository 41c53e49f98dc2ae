"""Hardness analyzers: min-fill treewidth, geometric density, slab thickness,
component statistics, and interaction-leakage constants.

The density and thickness sweeps minimize over a finite set of orientations
(default 0.5-degree steps), enumerating offsets only at projection
breakpoints; per orientation the result is exact, across orientations it is
an upper bound on the true minimum.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graph import Graph, Instance

DEFAULT_ORIENTATIONS = 180


@dataclass(frozen=True)
class TreeDecomposition:
    """Bags plus the tree connecting them; width is max bag size minus one."""

    bags: tuple[frozenset[int], ...]
    tree_edges: tuple[tuple[int, int], ...]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    @property
    def num_bags(self) -> int:
        return len(self.bags)


@dataclass(frozen=True)
class HardnessReport:
    fill_density: Optional[float]
    geometric_density: Optional[int]
    treewidth_est: int
    thickness_est: Optional[int]
    component_sizes: tuple[int, ...]


def validate_decomposition(g: Graph, td: TreeDecomposition) -> None:
    """Raise ValueError citing the violated tree-decomposition axiom."""
    nb = len(td.bags)
    if nb == 0:
        raise ValueError("decomposition has no bags")
    # tree structure
    adj: list[list[int]] = [[] for _ in range(nb)]
    for a, b in td.tree_edges:
        if not (0 <= a < nb and 0 <= b < nb):
            raise ValueError(f"tree edge ({a}, {b}) references a missing bag")
        adj[a].append(b)
        adj[b].append(a)
    seen = [False] * nb
    queue = deque([0])
    seen[0] = True
    reached = 1
    while queue:
        x = queue.popleft()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                reached += 1
                queue.append(y)
    if reached != nb or len(td.tree_edges) != nb - 1:
        raise ValueError(
            f"decomposition graph is not a tree ({nb} bags, "
            f"{len(td.tree_edges)} edges, {reached} reachable)"
        )
    # vertex coverage
    bag_of: dict[int, list[int]] = {}
    for k, bag in enumerate(td.bags):
        for v in bag:
            bag_of.setdefault(v, []).append(k)
    for v in range(g.n):
        if v not in bag_of:
            raise ValueError(f"vertex {v} not covered by any bag")
    # edge coverage
    for i, j in g.edges:
        if not any(i in td.bags[k] and j in td.bags[k] for k in bag_of[i]):
            raise ValueError(f"edge ({i}, {j}) not contained in any bag")
    # connected subtree per vertex
    for v, ks in bag_of.items():
        members = set(ks)
        queue = deque([ks[0]])
        hit = {ks[0]}
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y in members and y not in hit:
                    hit.add(y)
                    queue.append(y)
        if hit != members:
            raise ValueError(
                f"bags containing vertex {v} do not induce a connected subtree"
            )


def minfill_treewidth(g: Graph) -> TreeDecomposition:
    """Tree decomposition from the min-fill elimination ordering.

    At each step the vertex whose elimination needs the fewest fill edges is
    removed (ties by lowest vertex index); its bag is the vertex plus its
    current neighborhood.  The reported width is an upper bound on the exact
    treewidth.
    """
    n = g.n
    if n == 0:
        return TreeDecomposition(bags=(frozenset(),), tree_edges=())
    adj: list[set[int]] = [set(a) for a in g.adjacency]
    alive = set(range(n))
    order: list[int] = []
    bags: list[frozenset[int]] = []
    for _ in range(n):
        best_v = -1
        best_fill = -1
        for v in sorted(alive):
            nbrs = adj[v]
            fill = 0
            nb_list = sorted(nbrs)
            for ai in range(len(nb_list)):
                a = nb_list[ai]
                for bi in range(ai + 1, len(nb_list)):
                    if nb_list[bi] not in adj[a]:
                        fill += 1
            if best_fill < 0 or fill < best_fill:
                best_v, best_fill = v, fill
        v = best_v
        nbrs = sorted(adj[v])
        bags.append(frozenset([v]) | frozenset(nbrs))
        order.append(v)
        for ai in range(len(nbrs)):
            a = nbrs[ai]
            for bi in range(ai + 1, len(nbrs)):
                b = nbrs[bi]
                adj[a].add(b)
                adj[b].add(a)
        for a in nbrs:
            adj[a].discard(v)
        adj[v].clear()
        alive.remove(v)
    pos = {v: k for k, v in enumerate(order)}
    tree_edges = []
    for k in range(n - 1):
        rest = bags[k] - {order[k]}
        parent = min(pos[u] for u in rest) if rest else k + 1
        tree_edges.append((k, parent))
    return TreeDecomposition(bags=tuple(bags), tree_edges=tuple(tree_edges))


def _scaled_points(inst: Instance) -> np.ndarray:
    if inst.positions is None:
        raise ValueError("instance has no positions; geometric analyzers need them")
    if inst.disk_radius is None or inst.disk_radius <= 0:
        raise ValueError("instance has no positive disk radius")
    pts = np.asarray(inst.positions, dtype=float)
    return pts / inst.disk_radius


def _max_in_unit_square(xr: np.ndarray, yr: np.ndarray) -> int:
    """Max number of points inside any half-open axis-aligned unit square."""
    order = np.argsort(xr, kind="stable")
    xs = xr[order]
    ys = yr[order]
    n = xs.size
    best = 0
    for i in range(n):
        hi = int(np.searchsorted(xs, xs[i] + 1.0, side="left"))
        if hi - i <= best:
            continue
        win = np.sort(ys[i:hi])
        counts = np.searchsorted(win, win + 1.0, side="left") - np.arange(win.size)
        m = int(counts.max())
        if m > best:
            best = m
    return best


def geometric_density(
    inst: Instance, n_orientations: int = DEFAULT_ORIENTATIONS
) -> int:
    """Max disk centers per unit grid cell, minimized over grid orientation.

    Coordinates are rescaled so the disk radius is 1.  For each orientation
    the worst cell over all grid offsets is found exactly: cell membership
    only changes when a grid line crosses a point projection, so anchoring
    cell edges at the points themselves enumerates every distinct case.
    """
    if n_orientations < 1:
        raise ValueError("n_orientations must be >= 1")
    pts = _scaled_points(inst)
    if pts.shape[0] == 0:
        return 0
    x, y = pts[:, 0], pts[:, 1]
    best = pts.shape[0]
    for k in range(n_orientations):
        theta = (math.pi / 2.0) * k / n_orientations
        c, s = math.cos(theta), math.sin(theta)
        xr = x * c + y * s
        yr = -x * s + y * c
        d = _max_in_unit_square(xr, yr)
        if d < best:
            best = d
        if best == 1:
            break
    return best


def thickness(inst: Instance, n_orientations: int = DEFAULT_ORIENTATIONS) -> int:
    """Min over slab decompositions of the max number of centers per slab.

    Slabs are half-open strips of unit width (after rescaling so the disk
    radius is 1).  Offsets are enumerated at projection breakpoints, which is
    exact per orientation; orientations sweep [0, pi).
    """
    if n_orientations < 1:
        raise ValueError("n_orientations must be >= 1")
    pts = _scaled_points(inst)
    n = pts.shape[0]
    if n == 0:
        return 0
    x, y = pts[:, 0], pts[:, 1]
    best = n
    for k in range(n_orientations):
        theta = math.pi * k / n_orientations
        proj = x * math.cos(theta) + y * math.sin(theta)
        offsets = np.unique(np.mod(proj, 1.0))
        theta_best = n
        for off in offsets:
            idx = np.floor(proj - off).astype(np.int64)
            counts = np.bincount(idx - idx.min())
            worst = int(counts.max())
            if worst < theta_best:
                theta_best = worst
            if theta_best == 1:
                break
        if theta_best < best:
            best = theta_best
        if best == 1:
            break
    return best


def component_stats(g: Graph) -> tuple[int, ...]:
    """Connected component sizes, descending.  Iterative, safe for n >= 1e5."""
    n = g.n
    seen = bytearray(n)
    adj = g.adjacency
    sizes = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = 1
        size = 1
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = 1
                    size += 1
                    queue.append(u)
        sizes.append(size)
    return tuple(sorted(sizes, reverse=True))


def component_masks(g: Graph) -> tuple[int, ...]:
    """Connected components as vertex bitmasks, ordered by lowest vertex."""
    n = g.n
    seen = bytearray(n)
    adj = g.adjacency
    out = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = 1
        mask = 1 << start
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = 1
                    mask |= 1 << u
                    queue.append(u)
        out.append(mask)
    return tuple(out)


def interaction_leakage(layout_kind: str) -> float:
    """Next-nearest over nearest interaction under a 1/r^6 law.

    Triangular layouts: farthest edge at spacing 1, closest non-edge at
    sqrt(3), giving (1/sqrt(3))^6 = 1/27 ~ 3.7%.  King's layouts: farthest
    edge at sqrt(2), closest relevant non-edge at sqrt(5), giving
    (sqrt(2)/sqrt(5))^6 = 8/125 = 6.4%.
    """
    if layout_kind == "triangular":
        return (1.0 / math.sqrt(3.0)) ** 6
    if layout_kind == "kings":
        return (math.sqrt(2.0) / math.sqrt(5.0)) ** 6
    raise ValueError(f"unknown layout kind {layout_kind!r}")


def analyze_instance(
    inst: Instance, n_orientations: int = DEFAULT_ORIENTATIONS
) -> HardnessReport:
    """Full hardness report; geometric fields are None without positions."""
    has_geometry = inst.positions is not None
    rho = inst.meta.get("rho")
    return HardnessReport(
        fill_density=float(rho) if rho is not None else None,
        geometric_density=(
            geometric_density(inst, n_orientations) if has_geometry else None
        ),
        treewidth_est=minfill_treewidth(inst.graph).width,
        thickness_est=thickness(inst, n_orientations) if has_geometry else None,
        component_sizes=component_stats(inst.graph),
    )
