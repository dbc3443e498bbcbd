"""Instance types, offline matching and fractional-matching checks.

Vertices are identified by their arrival position (0-based). A vertex-arrival
instance stores, for every vertex, the sorted list of neighbors that arrived
before it; an edge-arrival instance stores the ordered edge stream.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

Edge = tuple[int, int]


def edge_key(u: int, v: int) -> Edge:
    """Canonical (smaller, larger) key for an undirected edge."""
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class ArrivalInstance:
    """General vertex arrivals: ``nbrs[v]`` lists the earlier neighbors of ``v``."""

    n: int
    nbrs: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 0 or len(self.nbrs) != self.n:
            raise ValueError(f"expected {self.n} neighbor lists, got {len(self.nbrs)}")
        for v, nb in enumerate(self.nbrs):
            if any(not (0 <= u < v) for u in nb):
                raise ValueError(f"vertex {v} lists a neighbor that has not arrived yet: {nb}")
            if list(nb) != sorted(set(nb)):
                raise ValueError(f"neighbors of {v} must be sorted and distinct: {nb}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> "ArrivalInstance":
        nb: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            a, b = edge_key(u, v)
            nb[b].add(a)
        return cls(n, tuple(tuple(sorted(s)) for s in nb))

    def edges(self) -> list[Edge]:
        """Edges ``(u, v)`` with ``u < v``, ordered by the arrival of ``v``."""
        return [(u, v) for v in range(self.n) for u in self.nbrs[v]]

    @property
    def m(self) -> int:
        return sum(len(nb) for nb in self.nbrs)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges():
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def prefix(self, k: int) -> "ArrivalInstance":
        """The instance revealed after the first ``k`` arrivals."""
        return ArrivalInstance(k, self.nbrs[:k])


@dataclass(frozen=True)
class EdgeArrivalInstance:
    """Edge arrivals on ``n`` vertices; ``edges`` is the arrival order."""

    n: int
    edges: tuple[Edge, ...]
    round_ends: tuple[int, ...] = field(default=())

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v or not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"bad edge ({u}, {v}) for n={self.n}")
            k = edge_key(u, v)
            if k in seen:
                raise ValueError(f"duplicate edge {k}")
            seen.add(k)
        if any(not (0 < e <= len(self.edges)) for e in self.round_ends):
            raise ValueError("round boundary out of range")


def check_matching(pairs: Iterable[Edge], edges: Iterable[Edge]) -> None:
    """Raise ``ValueError`` unless ``pairs`` is a matching inside ``edges``."""
    edge_set = {edge_key(u, v) for u, v in edges}
    used: set[int] = set()
    for u, v in pairs:
        if edge_key(u, v) not in edge_set:
            raise ValueError(f"({u}, {v}) is not an instance edge")
        if u in used or v in used:
            raise ValueError(f"vertex reused in matching at ({u}, {v})")
        used.update((u, v))


def maximum_matching(n: int, edges: Iterable[Edge]) -> list[Edge]:
    """Maximum-cardinality matching of a general graph (Edmonds' blossom, O(n^3))."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        if u != v:
            adj[u].append(v)
            adj[v].append(u)
    match = [-1] * n

    # greedy warm start
    for v in range(n):
        if match[v] == -1:
            for u in adj[v]:
                if match[u] == -1:
                    match[u], match[v] = v, u
                    break

    def find_augmenting(root: int) -> None:
        parent = [-1] * n
        base = list(range(n))
        used = [False] * n
        used[root] = True
        queue = deque([root])

        def lca(a: int, b: int) -> int:
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if match[a] == -1:
                    break
                a = parent[match[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[match[b]]

        def mark_path(v: int, b: int, child: int, blossom: list[bool]) -> None:
            while base[v] != b:
                blossom[base[v]] = blossom[base[match[v]]] = True
                parent[v] = child
                child = match[v]
                v = parent[match[v]]

        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and parent[match[to]] != -1):
                    cur = lca(v, to)
                    blossom = [False] * n
                    mark_path(v, cur, to, blossom)
                    mark_path(to, cur, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if match[to] == -1:
                        # augment along the alternating path ending at `to`
                        w = to
                        while w != -1:
                            pw = parent[w]
                            nxt = match[pw]
                            match[w], match[pw] = pw, w
                            w = nxt
                        return
                    used[match[to]] = True
                    queue.append(match[to])

    for v in range(n):
        if match[v] == -1 and adj[v]:
            find_augmenting(v)
    return [(u, match[u]) for u in range(n) if match[u] > u]


def brute_force_max_matching(n: int, edges: Iterable[Edge], limit: int = 12) -> list[Edge]:
    """Exhaustive maximum matching; a test oracle for small graphs."""
    if n > limit:
        raise ValueError(f"instance has {n} vertices, brute force limit is {limit}")
    es = sorted({edge_key(u, v) for u, v in edges if u != v})

    best: list[Edge] = []

    def rec(i: int, used: int, chosen: list[Edge]) -> None:
        nonlocal best
        if len(chosen) + (len(es) - i) <= len(best):
            return
        if i == len(es):
            best = list(chosen)
            return
        u, v = es[i]
        if not (used >> u) & 1 and not (used >> v) & 1:
            chosen.append((u, v))
            rec(i + 1, used | (1 << u) | (1 << v), chosen)
            chosen.pop()
        rec(i + 1, used, chosen)

    rec(0, 0, [])
    return best


def vertex_loads(x: Mapping[Edge, float], n: int) -> list[float]:
    loads = [0.0] * n
    for (u, v), val in x.items():
        loads[u] += val
        loads[v] += val
    return loads


@dataclass
class FeasibilityReport:
    feasible: bool
    max_load: float
    min_value: float
    worst_vertex: int | None


def check_fractional_feasibility(
    x: Mapping[Edge, float], n: int, edges: Sequence[Edge], tol: float = 1e-9
) -> FeasibilityReport:
    """Check that ``x`` lies in the fractional matching polytope (within ``tol``)."""
    edge_set = {edge_key(u, v) for u, v in edges}
    for e in x:
        if edge_key(*e) not in edge_set:
            raise KeyError(f"unknown edge {e}")
    loads = vertex_loads(x, n)
    max_load = max(loads, default=0.0)
    worst = max(range(n), key=loads.__getitem__) if n else None
    min_value = min(x.values(), default=0.0)
    ok = max_load <= 1.0 + tol and min_value >= -tol
    return FeasibilityReport(ok, max_load, min_value, worst)


def fractional_value(x: Mapping[Edge, float]) -> float:
    return float(sum(x.values()))


# -- text format ------------------------------------------------------------

def dump_instance(inst: ArrivalInstance | EdgeArrivalInstance) -> str:
    """Serialize an instance to the line-oriented text format."""
    if isinstance(inst, ArrivalInstance):
        lines = ["mode vertex", f"n {inst.n}"]
        lines += [" ".join(["arrive", str(v), *map(str, nb)]) for v, nb in enumerate(inst.nbrs)]
    else:
        lines = ["mode edge", f"n {inst.n}"]
        lines += [f"edge {u} {v}" for u, v in inst.edges]
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> ArrivalInstance | EdgeArrivalInstance:
    mode = None
    n = None
    nbrs: list[tuple[int, ...]] = []
    edges: list[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "mode":
                mode = rest[0]
                if mode not in ("vertex", "edge"):
                    raise ValueError(f"unknown mode {mode!r}")
            elif head == "n":
                n = int(rest[0])
            elif head == "arrive":
                v = int(rest[0])
                if v != len(nbrs):
                    raise ValueError(f"arrivals out of order: got {v}, expected {len(nbrs)}")
                nbrs.append(tuple(sorted(int(t) for t in rest[1:])))
            elif head == "edge":
                edges.append((int(rest[0]), int(rest[1])))
            else:
                raise ValueError(f"unknown directive {head!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if mode is None or n is None:
        raise ValueError("missing 'mode' or 'n' header")
    if mode == "vertex":
        if len(nbrs) != n:
            raise ValueError(f"expected {n} arrivals, found {len(nbrs)}")
        return ArrivalInstance(n, tuple(nbrs))
    return EdgeArrivalInstance(n, tuple(edges))
