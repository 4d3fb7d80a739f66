"""Graphs, separations, rooted patterns and minor models.

Everything else in the package is phrased in terms of the types here.
Vertex ids are non-negative ints. Pattern vertices are 1..n.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Tuple

from .errors import GraphError, ModelError

VertexSet = FrozenSet[int]
# pattern vertex -> branch set in the host graph
MinorModel = Dict[int, FrozenSet[int]]


class Graph:
    """Simple undirected graph on non-negative integer ids.

    ``fresh()`` hands out ids that are unused in this graph and in every
    graph it was copied from, so replacements never collide.
    """

    __slots__ = ("_adj", "_next")

    def __init__(self, vertices: Iterable[int] = (), edges: Iterable[Tuple[int, int]] = ()):
        self._adj: Dict[int, set] = {}
        self._next = 0
        for v in vertices:
            self.add_vertex(v)
        for u, v in edges:
            self.add_edge(u, v)

    # construction
    def add_vertex(self, v: int) -> None:
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise GraphError(f"vertex ids must be non-negative ints, got {v!r}")
        if v not in self._adj:
            self._adj[v] = set()
        if v >= self._next:
            self._next = v + 1

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise GraphError(f"self-loop on {u}")
        self.add_vertex(u)
        self.add_vertex(v)
        self._adj[u].add(v)
        self._adj[v].add(u)

    def remove_edge(self, u: int, v: int) -> None:
        self._adj[u].discard(v)
        self._adj[v].discard(u)

    def remove_vertex(self, v: int) -> None:
        for u in self._adj.pop(v):
            self._adj[u].discard(v)

    def fresh(self) -> int:
        v = self._next
        self.add_vertex(v)
        return v

    def reserve(self, bound: int) -> None:
        """Make sure future fresh ids are at least ``bound``."""
        self._next = max(self._next, bound)

    def take_ids(self, count: int) -> range:
        """Claim ``count`` fresh ids without adding vertices."""
        start = self._next
        self._next += count
        return range(start, start + count)

    @property
    def next_id(self) -> int:
        return self._next

    # queries
    @property
    def vertices(self) -> FrozenSet[int]:
        return frozenset(self._adj)

    def __contains__(self, v) -> bool:
        return v in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def __iter__(self):
        return iter(sorted(self._adj))

    def neighbors(self, v: int) -> set:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return u in self._adj and v in self._adj[u]

    def edges(self):
        """Sorted list of edges (u, v) with u < v."""
        return sorted((u, v) for u, nb in self._adj.items() for v in nb if u < v)

    def number_of_edges(self) -> int:
        return sum(len(nb) for nb in self._adj.values()) // 2

    def size(self) -> int:
        """|V| + |E|."""
        return len(self._adj) + self.number_of_edges()

    def copy(self) -> "Graph":
        g = Graph()
        g._adj = {v: set(nb) for v, nb in self._adj.items()}
        g._next = self._next
        return g

    def subgraph(self, vertices: Iterable[int]) -> "Graph":
        """Induced subgraph. Keeps the fresh-id counter of the parent."""
        keep = set(vertices)
        missing = keep - self._adj.keys()
        if missing:
            raise GraphError(f"unknown vertices {sorted(missing)}")
        g = Graph()
        g._adj = {v: self._adj[v] & keep for v in keep}
        g._next = self._next
        return g

    def without(self, vertices: Iterable[int]) -> "Graph":
        drop = set(vertices)
        return self.subgraph(v for v in self._adj if v not in drop)

    def neighborhood(self, vertices: Iterable[int]) -> FrozenSet[int]:
        """Open neighbourhood N(S)."""
        s = set(vertices)
        out = set()
        for v in s:
            out |= self._adj[v]
        return frozenset(out - s)

    def closed_neighborhood(self, vertices: Iterable[int]) -> FrozenSet[int]:
        s = frozenset(vertices)
        return s | self.neighborhood(s)

    def reach(self, sources: Iterable[int], blocked: Iterable[int] = ()) -> FrozenSet[int]:
        """Vertices reachable from ``sources - blocked`` in G - blocked."""
        blocked = set(blocked)
        seen = {s for s in sources if s not in blocked and s in self._adj}
        queue = deque(seen)
        while queue:
            v = queue.popleft()
            for u in self._adj[v]:
                if u not in seen and u not in blocked:
                    seen.add(u)
                    queue.append(u)
        return frozenset(seen)

    def components(self, within: Iterable[int] | None = None):
        """Connected components (of G[within] if given), ordered by least id."""
        pool = set(self._adj) if within is None else set(within)
        blocked = set(self._adj) - pool
        comps = []
        for v in sorted(pool):
            if any(v in c for c in comps):
                continue
            comps.append(self.reach([v], blocked))
        return comps

    def is_connected(self, vertices: Iterable[int] | None = None) -> bool:
        pool = set(self._adj) if vertices is None else set(vertices)
        if not pool:
            return True
        return len(self.reach([min(pool)], set(self._adj) - pool)) == len(pool)

    def is_independent(self, vertices: Iterable[int]) -> bool:
        s = set(vertices)
        return all(not (self._adj[v] & s) for v in s)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._adj == other._adj

    def __repr__(self) -> str:
        return f"Graph(n={len(self)}, m={self.number_of_edges()})"


@dataclass(frozen=True)
class Separation:
    A: FrozenSet[int]
    B: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "A", frozenset(self.A))
        object.__setattr__(self, "B", frozenset(self.B))

    @property
    def separator(self) -> FrozenSet[int]:
        return self.A & self.B

    @property
    def order(self) -> int:
        return len(self.A & self.B)

    def swapped(self) -> "Separation":
        return Separation(self.B, self.A)


def is_separation(G: Graph, sep: Separation) -> bool:
    if not (sep.A <= G.vertices and sep.B <= G.vertices):
        raise GraphError("separation sides must be vertex subsets of G")
    if sep.A | sep.B != G.vertices:
        return False
    only_a = sep.A - sep.B
    only_b = sep.B - sep.A
    return not any(G.neighbors(v) & only_b for v in only_a)


@dataclass(frozen=True)
class Instance:
    graph: Graph
    roots: FrozenSet[int]
    delta: int

    def __post_init__(self):
        object.__setattr__(self, "roots", frozenset(self.roots))
        if self.delta < 0:
            raise GraphError("detail bound must be non-negative")
        if not self.roots <= self.graph.vertices:
            raise GraphError("roots must be vertices of the graph")


# ---------------------------------------------------------------------------
# rooted patterns


def _bits(n: int, edges, order) -> str:
    pos = {v: i for i, v in enumerate(order)}
    es = {(min(pos[u], pos[v]), max(pos[u], pos[v])) for u, v in edges}
    return "".join("1" if (i, j) in es else "0" for i in range(n) for j in range(i + 1, n))


@dataclass(frozen=True, order=True)
class RootedGraph:
    """An X-rooted pattern in canonical form.

    ``roots[i]`` is the root set of pattern vertex ``i + 1``. Rooted vertices
    come first, sorted by their root sets; unrooted vertices follow, arranged
    so the upper-triangle adjacency bitstring is lexicographically least.
    Build instances with :meth:`make` or :func:`canonicalize`.
    """

    roots: Tuple[Tuple[int, ...], ...]
    bits: str

    @property
    def n(self) -> int:
        return len(self.roots)

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @property
    def detail(self) -> int:
        return sum(1 for r in self.roots if not r)

    def root_set(self, u: int) -> FrozenSet[int]:
        return frozenset(self.roots[u - 1])

    @property
    def root_union(self) -> FrozenSet[int]:
        return frozenset(x for r in self.roots for x in r)

    def edges(self):
        n = self.n
        out = []
        it = iter(self.bits)
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                if next(it) == "1":
                    out.append((i, j))
        return out

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        i, j = min(u, v) - 1, max(u, v) - 1
        # offset of row i in the upper triangle
        idx = i * self.n - i * (i + 1) // 2 + (j - i - 1)
        return self.bits[idx] == "1"

    def graph(self) -> Graph:
        return Graph(self.vertices, self.edges())

    @classmethod
    def make(cls, roots: Mapping[int, Iterable[int]], edges: Iterable[Tuple[int, int]] = ()) -> "RootedGraph":
        return canonicalize(roots, edges)[0]

    def encode(self) -> str:
        """Stable text form: bitstring then root listing."""
        rs = ";".join(",".join(map(str, r)) for r in self.roots)
        return f"{self.n}:{self.bits or '-'}:{rs}"

    @classmethod
    def decode(cls, text: str) -> "RootedGraph":
        """Inverse of :meth:`encode`; the result is re-canonicalised."""
        try:
            n_s, bits, rs = text.split(":", 2)
            n = int(n_s)
            bits = "" if bits == "-" else bits
            parts = rs.split(";") if n else []
            roots = {i + 1: tuple(int(x) for x in parts[i].split(",") if x) for i in range(n)}
        except (ValueError, IndexError) as exc:
            raise GraphError(f"bad pattern encoding {text!r}") from exc
        if len(parts) != n or len(bits) != n * (n - 1) // 2 or set(bits) - {"0", "1"}:
            raise GraphError(f"bad pattern encoding {text!r}")
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
        return canonicalize(roots, [e for e, b in zip(pairs, bits) if b == "1"])[0]

    def __repr__(self) -> str:
        return f"RootedGraph({self.encode()})"


EMPTY_PATTERN = RootedGraph((), "")


def _refined_colours(rooted, free, adj):
    """Colour refinement on the free vertices, started from the rooted
    prefix; colours are ranks, so they do not depend on labels."""
    pos = {u: i for i, u in enumerate(rooted)}
    colour = {v: 0 for v in free}
    while True:
        sig = {
            v: (
                colour[v],
                tuple(sorted(pos[w] for w in adj[v] if w in pos)),
                tuple(sorted(colour[w] for w in adj[v] if w in colour)),
            )
            for v in free
        }
        ranks = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {v: ranks[sig[v]] for v in free}
        if len(set(new.values())) == len(set(colour.values())):
            return new
        colour = new


def _free_order(rooted, free, edges):
    """Order of the unrooted vertices after the rooted prefix.

    Vertices go in order of refined colour; within a colour the order
    minimises the column-by-column adjacency key. Only vertices giving the
    least next column are tried, and of two interchangeable twins only one.
    """
    if len(free) <= 1:
        return list(free)
    adj = {u: set() for u in list(rooted) + list(free)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    # refinement only pays off once there are several free vertices
    colour = _refined_colours(rooted, free, adj) if len(free) > 3 else dict.fromkeys(free, 0)
    best = [None, None]

    def rec(order, remaining, key):
        if not remaining:
            if best[0] is None or key < best[0]:
                best[0], best[1] = key, order[len(rooted):]
            return
        c = min(colour[v] for v in remaining)
        cols = {
            v: tuple(1 if w in adj[v] else 0 for w in order)
            for v in remaining
            if colour[v] == c
        }
        low = min(cols.values())
        kept = []
        for v in sorted(cols):
            if cols[v] != low or any(adj[v] - {u} == adj[u] - {v} for u in kept):
                continue
            kept.append(v)
        for v in kept:
            rec(order + [v], [w for w in remaining if w != v], key + low)

    rec(list(rooted), list(free), ())
    return best[1]


def canonicalize(roots: Mapping[int, Iterable[int]], edges: Iterable[Tuple[int, int]] = ()):
    """Canonical form of a rooted pattern given on arbitrary labels.

    Returns ``(pattern, relabel)`` where relabel maps each input label to its
    vertex in 1..n of the canonical pattern.
    """
    rs = {u: tuple(sorted(r)) for u, r in roots.items()}
    edges = [(u, v) for u, v in edges]
    for u, v in edges:
        if u not in rs or v not in rs:
            raise GraphError(f"pattern edge {u}-{v} uses an unknown vertex")
        if u == v:
            raise GraphError("pattern self-loop")
    seen = set()
    for r in rs.values():
        if seen & set(r):
            raise GraphError("pattern root sets must be pairwise disjoint")
        seen |= set(r)
    rooted = sorted((u for u in rs if rs[u]), key=lambda u: rs[u])
    free = sorted(u for u in rs if not rs[u])
    n = len(rs)
    best_order = rooted + _free_order(rooted, free, edges)
    best = _bits(n, edges, best_order)
    pattern = RootedGraph(tuple(rs[u] for u in best_order), best)
    return pattern, {u: i + 1 for i, u in enumerate(best_order)}


def relabel_model(model: Mapping[int, Iterable[int]], relabel: Mapping[int, int]) -> MinorModel:
    return {relabel[u]: frozenset(b) for u, b in model.items()}


# ---------------------------------------------------------------------------
# models


def validate_model(G: Graph, X: Iterable[int], P: RootedGraph, M: Mapping[int, Iterable[int]]) -> bool:
    """True iff M is an X-rooted minor model of P in G.

    Raises ModelError when M names host vertices outside G or its keys are
    not exactly the pattern vertices.
    """
    X = frozenset(X)
    if set(M) != set(P.vertices):
        raise ModelError("model keys must be exactly the pattern vertices")
    branch = {u: frozenset(b) for u, b in M.items()}
    for u, b in branch.items():
        bad = b - G.vertices
        if bad:
            raise ModelError(f"branch set of {u} uses unknown vertices {sorted(bad)}")
    used = set()
    for u in P.vertices:
        b = branch[u]
        if not b or used & b:
            return False
        used |= b
        if not G.is_connected(b):
            return False
        if b & X != P.root_set(u):
            return False
    for u, v in P.edges():
        bu, bv = branch[u], branch[v]
        if not any(G.neighbors(x) & bv for x in bu):
            return False
    return True


def contract_sets(G: Graph, parts):
    """Contract each part to a single fresh vertex.

    Returns ``(H, mapping)`` where mapping sends every vertex of G to its
    vertex in H.
    """
    parts = [frozenset(p) for p in parts]
    owner = {}
    for i, p in enumerate(parts):
        if not p:
            raise GraphError("cannot contract an empty part")
        if not p <= G.vertices:
            raise GraphError("part uses unknown vertices")
        if not G.is_connected(p):
            raise GraphError(f"part {sorted(p)} is not connected")
        for v in p:
            if v in owner:
                raise GraphError("parts overlap")
            owner[v] = i
    H = Graph()
    H._next = G._next
    mapping = {}
    new_ids = [H.fresh() for _ in parts]
    for v in G:
        mapping[v] = new_ids[owner[v]] if v in owner else v
        H.add_vertex(mapping[v])
    for u, v in G.edges():
        a, b = mapping[u], mapping[v]
        if a != b:
            H.add_edge(a, b)
    return H, mapping


def unrooted_clique(h: int) -> RootedGraph:
    return RootedGraph(tuple(() for _ in range(h)), "1" * (h * (h - 1) // 2))
