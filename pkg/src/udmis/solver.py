"""Exact maximum-weight independent set solvers and the greedy approximation.

The branch-and-bound solver counts work in deterministic *ticks* so that the
cost of a solve is bit-identical across runs, platforms, and surrounding
thread counts.  Tick accounting (documented contract):

* +1 per branch-node expansion,
* +1 per bound evaluation,
* +1 per candidate-list update, which covers each child subproblem pushed
  (include branch, exclude branch), each forced-inclusion reduction applied,
  and each vertex added while building the initial greedy incumbent.

The LP root relaxation is the plain edge formulation (x_i + x_j <= 1,
0 <= x_i <= 1).  Its optimum is half-integral and is computed exactly by a
max-flow on the bipartite double cover with rational arithmetic, avoiding
any LP-solver nondeterminism.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .graph import Graph, Instance
from .hardness import TreeDecomposition, component_masks, validate_decomposition

BRUTE_FORCE_MAX_N = 26
TREEWIDTH_DP_MAX_WIDTH = 25


@dataclass(frozen=True)
class SolveReport:
    """Result of an exact solve: value, witness, and deterministic cost."""

    optimum: float
    solution: tuple[int, ...]
    ticks: int
    bb_nodes: int
    lp_root: float
    root_gap_pct: float
    optimal: bool


def _mask_to_vertices(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        lsb = mask & -mask
        out.append(lsb.bit_length() - 1)
        mask ^= lsb
    return tuple(out)


def solve_bb(g: Graph, budget: Optional[int] = None) -> SolveReport:
    """Exact MWIS via branch and bound with deterministic tick accounting.

    Branches on the candidate vertex of maximum weighted degree (ties by
    lowest index), include branch first.  The bound is a greedy clique cover
    of the remaining candidates (sum of the heaviest vertex per clique).
    Vertices whose weight dominates their remaining neighborhood are included
    without branching.  With a tick ``budget`` the report may come back
    flagged non-optimal, carrying the best incumbent found.
    """
    n = g.n
    if n == 0:
        return SolveReport(0.0, (), 0, 0, 0.0, 0.0, True)
    masks = g.neighbor_masks
    w = g.weights
    unit = g.is_unit_weighted

    if unit:
        def wsum(mask: int) -> float:
            return float(mask.bit_count())
    else:
        def wsum(mask: int) -> float:
            total = 0.0
            while mask:
                lsb = mask & -mask
                total += w[lsb.bit_length() - 1]
                mask ^= lsb
            return total

    def bound(cand: int) -> float:
        # greedy clique cover, lowest-index-first: deterministic and tight on
        # geometric graphs where neighborhoods are clique-rich
        total = 0.0
        rest = cand
        while rest:
            lsb = rest & -rest
            v = lsb.bit_length() - 1
            rest ^= lsb
            mx = w[v]
            common = masks[v] & rest
            while common:
                l2 = common & -common
                u = l2.bit_length() - 1
                rest ^= l2
                if w[u] > mx:
                    mx = w[u]
                common = (common ^ l2) & masks[u]
            total += mx
        return total

    greedy_order = sorted(range(n), key=lambda v: (-w[v], v))
    ticks = 0
    nodes = 0
    truncated = False
    total_best = 0.0
    total_mask = 0

    for comp in component_masks(g):
        if truncated:
            break
        inc_mask = 0
        blocked = ~comp
        for v in greedy_order:
            b = 1 << v
            if blocked & b:
                continue
            inc_mask |= b
            blocked |= b | masks[v]
            ticks += 1
        best_w = wsum(inc_mask)
        best_mask = inc_mask

        stack = [(comp, 0, 0.0)]
        while stack:
            if budget is not None and ticks >= budget:
                truncated = True
                break
            cand, chosen, cw = stack.pop()
            nodes += 1
            ticks += 1
            # forced inclusions: vertex weight dominates remaining neighborhood
            scan = cand
            while scan:
                lsb = scan & -scan
                scan ^= lsb
                if not cand & lsb:
                    continue
                v = lsb.bit_length() - 1
                nb = masks[v] & cand
                if w[v] >= wsum(nb):
                    chosen |= lsb
                    cw += w[v]
                    cand &= ~(nb | lsb)
                    ticks += 1
            if cw > best_w:
                best_w = cw
                best_mask = chosen
            if not cand:
                continue
            ticks += 1
            if cw + bound(cand) <= best_w:
                continue
            # branch vertex: max weighted degree among candidates, ties by index
            bv = -1
            bwd = -1.0
            scan = cand
            while scan:
                lsb = scan & -scan
                scan ^= lsb
                v = lsb.bit_length() - 1
                wd = wsum(masks[v] & cand)
                if wd > bwd:
                    bwd = wd
                    bv = v
            b = 1 << bv
            stack.append((cand & ~b, chosen, cw))
            ticks += 1
            stack.append((cand & ~(masks[bv] | b), chosen | b, cw + w[bv]))
            ticks += 1
        total_best += best_w
        total_mask |= best_mask

    lp = lp_root_relaxation(g)
    gap = 0.0 if lp <= 0 else max(0.0, 100.0 * (lp - total_best) / lp)
    return SolveReport(
        optimum=total_best,
        solution=_mask_to_vertices(total_mask),
        ticks=ticks,
        bb_nodes=nodes,
        lp_root=lp,
        root_gap_pct=gap,
        optimal=not truncated,
    )


def brute_force(g: Graph, tol: float = 1e-9) -> tuple[float, int]:
    """Exhaustive MWIS scan over all 2^n assignments.

    Returns the optimum weight and the number of optimal independent sets
    (ties within ``tol``).  Test oracle; rejects n > 26.
    """
    n = g.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force capped at n <= {BRUTE_FORCE_MAX_N}, got {n}")
    if n == 0:
        return 0.0, 1
    weights = np.asarray(g.weights, dtype=np.float64)
    edges = g.edges
    best = -math.inf
    count = 0
    chunk = 1 << 20
    total = 1 << n
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        m = np.arange(start, stop, dtype=np.int64)
        ok = np.ones(m.size, dtype=bool)
        for i, j in edges:
            ok &= ((m >> i) & (m >> j) & 1) == 0
        vals = np.zeros(m.size, dtype=np.float64)
        for i in range(n):
            vals += weights[i] * ((m >> i) & 1)
        vals = np.where(ok, vals, -np.inf)
        cbest = float(vals.max())
        if cbest > best + tol:
            best = cbest
            count = int(np.count_nonzero(vals >= cbest - tol))
        elif cbest >= best - tol:
            count += int(np.count_nonzero(vals >= best - tol))
    return best, count


class _Dinic:
    """Max-flow with exact Fraction capacities (inputs are tiny bipartite nets)."""

    def __init__(self, num_nodes: int):
        self.n = num_nodes
        self.head: list[list[int]] = [[] for _ in range(num_nodes)]
        self.to: list[int] = []
        self.cap: list[Fraction] = []

    def add_edge(self, u: int, v: int, cap: Fraction) -> None:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(cap)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(Fraction(0))

    def max_flow(self, s: int, t: int) -> Fraction:
        flow = Fraction(0)
        zero = Fraction(0)
        while True:
            level = [-1] * self.n
            level[s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for eid in self.head[u]:
                    v = self.to[eid]
                    if self.cap[eid] > zero and level[v] < 0:
                        level[v] = level[u] + 1
                        queue.append(v)
            if level[t] < 0:
                return flow
            it = [0] * self.n

            def dfs(u: int, pushed: Fraction) -> Fraction:
                if u == t:
                    return pushed
                while it[u] < len(self.head[u]):
                    eid = self.head[u][it[u]]
                    v = self.to[eid]
                    if self.cap[eid] > zero and level[v] == level[u] + 1:
                        got = dfs(v, min(pushed, self.cap[eid]))
                        if got > zero:
                            self.cap[eid] -= got
                            self.cap[eid ^ 1] += got
                            return got
                    it[u] += 1
                return zero

            while True:
                pushed = dfs(s, Fraction(1 << 62))
                if pushed == zero:
                    break
                flow += pushed


def lp_root_relaxation(g: Graph) -> float:
    """Exact optimum of the edge LP relaxation of MWIS.

    The relaxation has a half-integral optimum; it equals the MWIS of the
    bipartite double cover with halved weights, which reduces to a min cut.
    """
    n = g.n
    if n == 0:
        return 0.0
    half = [Fraction(w) / 2 for w in g.weights]
    total = sum(Fraction(w) for w in g.weights)
    # nodes: 0 = source, 1 = sink, 2+v = v_plus, 2+n+v = v_minus
    net = _Dinic(2 + 2 * n)
    big = total + 1
    for v in range(n):
        if half[v] > 0:
            net.add_edge(0, 2 + v, half[v])
            net.add_edge(2 + n + v, 1, half[v])
    for i, j in g.edges:
        net.add_edge(2 + i, 2 + n + j, big)
        net.add_edge(2 + j, 2 + n + i, big)
    cut = net.max_flow(0, 1)
    return float(total - cut)


def root_gap(g: Graph) -> float:
    """Percent gap 100 * (z_LP - z*) / z_LP between edge-LP and integer optimum."""
    lp = lp_root_relaxation(g)
    if lp <= 0:
        raise ValueError("root gap undefined: LP optimum is zero (all-zero weights)")
    opt = solve_bb(g).optimum
    return max(0.0, 100.0 * (lp - opt) / lp)


def solve_treewidth_dp(g: Graph, td: TreeDecomposition) -> float:
    """Exact MWIS weight by dynamic programming over a tree decomposition.

    Tables are indexed by independent subsets of each bag; child tables are
    projected onto the shared vertices of the parent bag.  Runs in
    O(2^width) per bag; width is capped at 25.
    """
    validate_decomposition(g, td)
    width = td.width
    if width > TREEWIDTH_DP_MAX_WIDTH:
        raise ValueError(
            f"decomposition width {width} exceeds the DP cap "
            f"{TREEWIDTH_DP_MAX_WIDTH}"
        )
    nb = td.num_bags
    adj: list[list[int]] = [[] for _ in range(nb)]
    for a, b in td.tree_edges:
        adj[a].append(b)
        adj[b].append(a)
    # root at bag 0, iterative post-order
    parent = [-1] * nb
    order = [0]
    seen = [False] * nb
    seen[0] = True
    for x in order:
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                order.append(y)

    masks = g.neighbor_masks
    weights = g.weights
    neg_inf = float("-inf")
    tables: dict[int, list[float]] = {}
    bag_verts: dict[int, list[int]] = {t: sorted(td.bags[t]) for t in range(nb)}

    for t in reversed(order):
        verts = bag_verts[t]
        k = len(verts)
        pos = {v: i for i, v in enumerate(verts)}
        local_conf = [0] * k
        for i, v in enumerate(verts):
            for j in range(i + 1, k):
                if masks[v] >> verts[j] & 1:
                    local_conf[i] |= 1 << j
                    local_conf[j] |= 1 << i
        size = 1 << k
        table = [0.0] * size
        indep = bytearray([1]) * size
        for s in range(1, size):
            low = s & -s
            i = low.bit_length() - 1
            rest = s ^ low
            if not indep[rest] or (local_conf[i] & rest):
                indep[s] = 0
                table[s] = neg_inf
            else:
                table[s] = table[rest] + weights[verts[i]]
        for c in adj[t]:
            if c == t or parent[c] != t:
                continue
            cverts = bag_verts[c]
            ctable = tables.pop(c)
            common = [v for v in cverts if v in pos]
            # map child-local subset of the shared vertices to parent-local bits
            cpos = {v: i for i, v in enumerate(cverts)}
            common_child_mask = 0
            for v in common:
                common_child_mask |= 1 << cpos[v]
            best: dict[int, float] = {}
            for sc, val in enumerate(ctable):
                if val == neg_inf:
                    continue
                shared = sc & common_child_mask
                key = 0
                overlap_w = 0.0
                sh = shared
                while sh:
                    l2 = sh & -sh
                    sh ^= l2
                    v = cverts[l2.bit_length() - 1]
                    key |= 1 << pos[v]
                    overlap_w += weights[v]
                adj_val = val - overlap_w
                if key not in best or adj_val > best[key]:
                    best[key] = adj_val
            common_parent_mask = 0
            for v in common:
                common_parent_mask |= 1 << pos[v]
            for s in range(size):
                if table[s] == neg_inf:
                    continue
                key = s & common_parent_mask
                extra = best.get(key, neg_inf)
                table[s] = table[s] + extra if extra != neg_inf else neg_inf
        tables[t] = table

    root_table = tables[order[0]]
    return max(v for v in root_table if v != neg_inf)


def greedy_leftmost(inst: Instance) -> tuple[int, ...]:
    """Leftmost-first greedy independent set on a geometric instance.

    Repeatedly takes the remaining vertex with minimum x (ties by y, then
    index) and deletes its closed neighborhood.  On unit-disk instances the
    result has at least a third of the maximum independent set size.
    """
    if inst.positions is None:
        raise ValueError("greedy_leftmost needs vertex positions")
    g = inst.graph
    order = sorted(
        range(g.n),
        key=lambda v: (inst.positions[v][0], inst.positions[v][1], v),
    )
    masks = g.neighbor_masks
    alive = (1 << g.n) - 1
    chosen = []
    for v in order:
        b = 1 << v
        if alive & b:
            chosen.append(v)
            alive &= ~(b | masks[v])
    return tuple(sorted(chosen))
