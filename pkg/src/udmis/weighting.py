"""Weight-assignment schemes and the exact subroutines they need.

Ten schemes: the unweighted baseline, uniform random weights, degree
centrality, matching and 2-distance matching, degree-based, annihilation,
maximum clique, closeness and betweenness centrality.  The matching is a
maximum-cardinality matching (deterministic, greedy-seeded blossom
augmentation); the clique and 2-distance matching subproblems reuse the
exact branch-and-bound solver on derived graphs.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import Graph, build_graph
from .hardness import component_stats
from .solver import solve_bb

SCHEME_KINDS = (
    "unweighted",
    "uniform_random",
    "degree_centrality",
    "matching",
    "two_distance_matching",
    "degree_based",
    "annihilation",
    "max_clique",
    "closeness",
    "betweenness",
)

MAX_CLIQUE_MAX_N = 500


@dataclass(frozen=True)
class WeightScheme:
    kind: str
    delta_bar: float = 1000.0
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in SCHEME_KINDS:
            raise ValueError(
                f"unknown scheme {self.kind!r}; expected one of {SCHEME_KINDS}"
            )
        if not (self.delta_bar > 0):
            raise ValueError(f"delta_bar must be positive, got {self.delta_bar}")


def annihilation_number(g: Graph) -> tuple[int, tuple[int, ...]]:
    """Largest k with the sum of the k smallest degrees at most |E|.

    Returns k and the first k vertices in (degree, index) ascending order.
    """
    order = sorted(range(g.n), key=lambda v: (g.degree(v), v))
    limit = g.num_edges
    total = 0
    k = 0
    for v in order:
        total += g.degree(v)
        if total > limit:
            break
        k += 1
    return k, tuple(order[:k])


def maximum_matching(g: Graph) -> tuple[tuple[int, int], ...]:
    """Maximum-cardinality matching on a general graph (blossom augmentation).

    Seeded greedily along the canonical ascending edge order, then augmented,
    so the result is deterministic for a given graph.
    """
    n = g.n
    adj = [list(a) for a in g.adjacency]
    match = [-1] * n
    for i, j in g.edges:
        if match[i] < 0 and match[j] < 0:
            match[i] = j
            match[j] = i

    p = [-1] * n
    base = list(range(n))

    def lca(a: int, b: int) -> int:
        mark = [False] * n
        x = a
        while True:
            x = base[x]
            mark[x] = True
            if match[x] < 0:
                break
            x = p[match[x]]
        y = b
        while True:
            y = base[y]
            if mark[y]:
                return y
            y = p[match[y]]

    def mark_path(v: int, b: int, child: int, blossom: list[bool]) -> None:
        while base[v] != b:
            blossom[base[v]] = True
            blossom[base[match[v]]] = True
            p[v] = child
            child = match[v]
            v = p[match[v]]

    def find_augmenting_path(root: int) -> bool:
        used = [False] * n
        for i in range(n):
            p[i] = -1
            base[i] = i
        used[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] >= 0 and p[match[to]] >= 0):
                    curbase = lca(v, to)
                    blossom = [False] * n
                    mark_path(v, curbase, to, blossom)
                    mark_path(to, curbase, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = curbase
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif p[to] < 0:
                    p[to] = v
                    if match[to] < 0:
                        u = to
                        while u >= 0:
                            pv = p[u]
                            nxt = match[pv]
                            match[u] = pv
                            match[pv] = u
                            u = nxt
                        return True
                    used[match[to]] = True
                    queue.append(match[to])
        return False

    for v in range(n):
        if match[v] < 0:
            find_augmenting_path(v)
    out = sorted((v, match[v]) for v in range(n) if 0 <= match[v] and v < match[v])
    return tuple(out)


def two_distance_matching(g: Graph) -> tuple[tuple[int, int], ...]:
    """Maximum edge set that is a matching with no two chosen edges joined by
    an edge of the graph.

    Solved exactly as a maximum independent set in the conflict graph whose
    vertices are the edges of ``g``.
    """
    edges = g.edges
    m = len(edges)
    masks = g.neighbor_masks
    conflicts = []
    for a in range(m):
        i, j = edges[a]
        touch = (1 << i) | (1 << j) | masks[i] | masks[j]
        for b in range(a + 1, m):
            x, y = edges[b]
            if touch >> x & 1 or touch >> y & 1:
                conflicts.append((a, b))
    conflict_graph = build_graph(m, conflicts)
    report = solve_bb(conflict_graph)
    chosen = tuple(edges[k] for k in report.solution)
    _check_two_distance(g, chosen)
    return chosen


def _check_two_distance(g: Graph, chosen: tuple[tuple[int, int], ...]) -> None:
    masks = g.neighbor_masks
    ends: set[int] = set()
    for i, j in chosen:
        if i in ends or j in ends:
            raise AssertionError("2-distance matching produced adjacent edges")
        ends.update((i, j))
    for i, j in chosen:
        for x, y in chosen:
            if (i, j) >= (x, y):
                continue
            if (masks[i] | masks[j]) & ((1 << x) | (1 << y)):
                raise AssertionError("2-distance matching edges joined by an edge")


def maximum_clique(g: Graph) -> tuple[int, ...]:
    """Exact maximum clique, found as an MIS of the complement graph."""
    n = g.n
    if n > MAX_CLIQUE_MAX_N:
        raise ValueError(f"maximum_clique capped at n <= {MAX_CLIQUE_MAX_N}, got {n}")
    if n == 0:
        return ()
    present = set(g.edges)
    comp_edges = [
        (i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in present
    ]
    report = solve_bb(build_graph(n, comp_edges))
    return report.solution


def closeness_centrality(g: Graph) -> tuple[float, ...]:
    """Closeness (n-1) / sum of BFS distances; rejects disconnected graphs."""
    n = g.n
    if n < 2:
        raise ValueError("closeness centrality needs at least 2 vertices")
    comps = component_stats(g)
    if len(comps) > 1:
        raise ValueError(
            f"closeness centrality undefined on a disconnected graph "
            f"({len(comps)} components)"
        )
    adj = g.adjacency
    out = []
    for s in range(n):
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        total = 0
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    total += dist[u]
                    queue.append(u)
        out.append((n - 1) / total)
    return tuple(out)


def betweenness_centrality(g: Graph) -> tuple[float, ...]:
    """Betweenness over ordered pairs s != t != v (Brandes accumulation)."""
    n = g.n
    adj = g.adjacency
    cb = [0.0] * n
    for s in range(n):
        sigma = [0.0] * n
        dist = [-1] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma[s] = 1.0
        dist[s] = 0
        queue = deque([s])
        stack = []
        while queue:
            v = queue.popleft()
            stack.append(v)
            for u in adj[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(u)
                if dist[u] == dist[v] + 1:
                    sigma[u] += sigma[v]
                    preds[u].append(v)
        delta = [0.0] * n
        while stack:
            u = stack.pop()
            for v in preds[u]:
                delta[v] += sigma[v] / sigma[u] * (1.0 + delta[u])
            if u != s:
                cb[u] += delta[u]
    return tuple(cb)


def apply_scheme(g: Graph, scheme: WeightScheme) -> Graph:
    """Copy of ``g`` with weights assigned according to the scheme."""
    n = g.n
    kind = scheme.kind
    db = scheme.delta_bar
    if kind == "unweighted":
        w = [1.0] * n
    elif kind == "uniform_random":
        if scheme.seed is None:
            raise ValueError("uniform_random scheme requires a seed")
        rng = np.random.default_rng(scheme.seed)
        w = [float(x) for x in rng.uniform(0.1, db, size=n)]
    elif kind == "degree_centrality":
        if n < 2:
            raise ValueError("degree_centrality needs at least 2 vertices")
        cd = [g.degree(v) / (n - 1) for v in range(n)]
        mx = max(cd)
        # all-equal centralities (regular or empty graphs): every vertex is
        # maximally central, so each gets the top weight
        w = [1.0 + db * (c / mx if mx > 0 else 1.0) for c in cd]
    elif kind == "matching":
        matched = {v for e in maximum_matching(g) for v in e}
        w = [1.0 if v in matched else 0.1 * (g.degree(v) + 1) for v in range(n)]
    elif kind == "two_distance_matching":
        matched = {v for e in two_distance_matching(g) for v in e}
        w = [1.0 if v in matched else 0.1 * (g.degree(v) + 1) for v in range(n)]
    elif kind == "degree_based":
        if n == 0:
            w = []
        else:
            dmin = min(g.degree(v) for v in range(n))
            w = [
                0.1 if g.degree(v) == dmin else 1000.0 * (g.degree(v) + 1)
                for v in range(n)
            ]
    elif kind == "annihilation":
        _, members = annihilation_number(g)
        inset = set(members)
        w = [1000.0 if v in inset else 0.1 for v in range(n)]
    elif kind == "max_clique":
        clique = set(maximum_clique(g))
        w = [1.0 if v in clique else 1000.0 for v in range(n)]
    elif kind == "closeness":
        cc = closeness_centrality(g)
        mx = max(cc)
        w = [1.0 + 999.0 * c / mx for c in cc]
    elif kind == "betweenness":
        cb = betweenness_centrality(g)
        lo, hi = min(cb), max(cb)
        if hi - lo <= 0:
            # vertex-transitive case: the formula degenerates to 0/0, resolved
            # to the minimum weight everywhere
            w = [0.1] * n
        else:
            w = [0.1 + 999.0 * (c - lo) / (hi - lo) for c in cb]
    else:  # pragma: no cover - guarded by WeightScheme validation
        raise ValueError(f"unknown scheme {kind!r}")
    for v, x in enumerate(w):
        if not math.isfinite(x) or x <= 0:
            raise AssertionError(f"scheme {kind} produced invalid weight {x} at {v}")
    return g.with_weights(w)
