"""Brute-force rooted minor search and folio computation.

These routines are slow but simple. Every faster path in the package is
tested against them.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Mapping, Optional

from .errors import GraphError, ResourceLimit
from .graph import (
    Graph,
    MinorModel,
    RootedGraph,
    canonicalize,
    relabel_model,
)

PATTERN_CEILING = 9
SEARCH_NODE_LIMIT = 5_000_000


@dataclass(frozen=True)
class Folio:
    members: FrozenSet[RootedGraph]
    roots: FrozenSet[int]
    delta: int

    def __contains__(self, p) -> bool:
        return p in self.members

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class ModelFolio:
    """A folio together with one witnessing model per member."""

    roots: FrozenSet[int]
    delta: int
    witness: Dict[RootedGraph, MinorModel] = field(default_factory=dict)

    @property
    def members(self) -> FrozenSet[RootedGraph]:
        return frozenset(self.witness)

    @property
    def folio(self) -> Folio:
        return Folio(self.members, frozenset(self.roots), self.delta)

    def __contains__(self, p) -> bool:
        return p in self.witness

    def __len__(self) -> int:
        return len(self.witness)

    def sorted_members(self):
        return sorted(self.witness)


# ---------------------------------------------------------------------------
# pattern universe


def _partial_partitions(items):
    """All ways to pick disjoint nonempty blocks from items (some unused)."""
    items = sorted(items)

    def rec(i, blocks):
        if i == len(items):
            yield [tuple(b) for b in blocks]
            return
        x = items[i]
        yield from rec(i + 1, blocks)
        for b in blocks:
            b.append(x)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([x])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(0, [])


def enumerate_patterns(X: Iterable[int], delta: int, ceiling: int = PATTERN_CEILING):
    """Every canonical X-rooted graph with detail at most delta, sorted."""
    X = frozenset(X)
    if delta < 0:
        raise GraphError("delta must be non-negative")
    if len(X) + delta > ceiling:
        raise ResourceLimit(f"|X|+delta = {len(X) + delta} exceeds pattern ceiling {ceiling}")
    out = set()
    for blocks in _partial_partitions(X):
        for free in range(delta + 1):
            n = len(blocks) + free
            roots = {i + 1: blocks[i] for i in range(len(blocks))}
            for j in range(free):
                roots[len(blocks) + j + 1] = ()
            slots = list(combinations(range(1, n + 1), 2))
            for mask in range(1 << len(slots)):
                es = [slots[i] for i in range(len(slots)) if mask >> i & 1]
                out.add(canonicalize(roots, es)[0])
    return sorted(out)


# ---------------------------------------------------------------------------
# single pattern search


def _grow(G: Graph, start: FrozenSet[int], allowed: FrozenSet[int], excluded: FrozenSet[int]):
    """Yield every connected S with start <= S <= allowed, S & excluded empty.

    ``start`` must be connected. Each set is produced once.
    """
    stack = [(start, excluded)]
    while stack:
        S, ex = stack.pop()
        yield S
        cand = sorted((G.neighborhood(S) & allowed) - ex)
        # push in reverse so smaller extensions come out first
        items = []
        for i, v in enumerate(cand):
            items.append((S | {v}, ex | frozenset(cand[:i])))
        stack.extend(reversed(items))


def connected_sets_containing(G: Graph, seed: Iterable[int], allowed: Iterable[int]):
    """Connected vertex sets S with seed <= S <= allowed."""
    seed = frozenset(seed)
    allowed = frozenset(allowed) | seed
    if not seed:
        return
    s0 = frozenset([min(seed)])
    rest = seed - s0
    stack = [(s0, frozenset())]
    while stack:
        S, ex = stack.pop()
        if ex & rest:
            continue
        if rest <= S:
            yield S
        cand = sorted((G.neighborhood(S) & allowed) - ex)
        items = [(S | {v}, ex | frozenset(cand[:i])) for i, v in enumerate(cand)]
        stack.extend(reversed(items))


class _Budget:
    def __init__(self, limit):
        self.left = limit

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise ResourceLimit("minor search node limit exceeded")


def minor_search(G: Graph, X: Iterable[int], P: RootedGraph, node_limit: int = SEARCH_NODE_LIMIT) -> Optional[MinorModel]:
    """Find an X-rooted model of P in G, or None.

    Branch sets are chosen one pattern vertex at a time, rooted vertices
    first. Raises ResourceLimit when the search exceeds ``node_limit`` nodes.
    """
    X = frozenset(X)
    if not P.root_union <= X:
        raise GraphError("pattern roots must lie in X")
    if not X <= G.vertices:
        raise GraphError("X must be a subset of V(G)")
    if P.n == 0:
        return {}
    if P.n > len(G) or len(P.edges()) > G.number_of_edges():
        return None
    budget = _Budget(node_limit)
    adj = {u: set() for u in P.vertices}
    for u, v in P.edges():
        adj[u].add(v)
        adj[v].add(u)
    order = sorted(P.vertices, key=lambda u: (not P.root_set(u), -len(adj[u]), u))
    V = G.vertices
    assign: Dict[int, FrozenSet[int]] = {}

    def touches(a, b):
        return any(G.neighbors(x) & b for x in a)

    def rec(i, used):
        budget.tick()
        if i == len(order):
            return True
        u = order[i]
        r = P.root_set(u)
        remaining = len(order) - i - 1
        allowed = (V - used) - (X - r)
        if r:
            cands = connected_sets_containing(G, r, allowed)
        else:
            cands = (S for v in sorted(allowed) for S in _grow(G, frozenset([v]), allowed, frozenset(w for w in allowed if w < v)))
        for S in cands:
            budget.tick()
            if len(V) - len(used) - len(S) < remaining:
                continue
            if all(touches(S, assign[w]) for w in adj[u] if w in assign):
                assign[u] = S
                if rec(i + 1, used | S):
                    return True
                del assign[u]
        return False

    if rec(0, frozenset()):
        return dict(assign)
    return None


# ---------------------------------------------------------------------------
# folio by exhaustive branch-set enumeration


def _quotient(G: Graph, X, blocks):
    roots = {i + 1: tuple(sorted(b & X)) for i, b in enumerate(blocks)}
    edges = []
    for i, j in combinations(range(len(blocks)), 2):
        bi, bj = blocks[i], blocks[j]
        if any(G.neighbors(v) & bj for v in bi):
            edges.append((i + 1, j + 1))
    return roots, edges


def _close_under_edge_deletion(found: Dict[RootedGraph, MinorModel]):
    queue = deque(sorted(found))
    while queue:
        p = queue.popleft()
        model = found[p]
        roots = {u: p.roots[u - 1] for u in p.vertices}
        es = p.edges()
        for e in es:
            q, relabel = canonicalize(roots, [f for f in es if f != e])
            if q not in found:
                found[q] = relabel_model(model, relabel)
                queue.append(q)
    return found


def brute_folio(G: Graph, X: Iterable[int], delta: int) -> ModelFolio:
    """The (X, delta)-model-folio of G by enumerating all branch-set families.

    Each vertex is either unused or belongs to one connected block; blocks
    without roots count toward the detail. The quotient of every family, and
    every spanning subgraph of it, is a member.
    """
    X = frozenset(X)
    if not X <= G.vertices:
        raise GraphError("X must be a subset of V(G)")
    if delta < 0:
        raise GraphError("delta must be non-negative")
    found: Dict[RootedGraph, MinorModel] = {}
    order = sorted(G.vertices)

    def rec(undecided, blocks, free_used):
        if not undecided:
            roots, edges = _quotient(G, X, blocks)
            p, relabel = canonicalize(roots, edges)
            if p not in found:
                found[p] = relabel_model({i + 1: b for i, b in enumerate(blocks)}, relabel)
            return
        v = min(undecided)
        rest = undecided - {v}
        # v unused
        rec(rest, blocks, free_used)
        # v is the least vertex of a new block
        for S in _grow(G, frozenset([v]), undecided, frozenset()):
            unrooted = not (S & X)
            if unrooted and free_used >= delta:
                continue
            blocks.append(S)
            rec(undecided - S, blocks, free_used + unrooted)
            blocks.pop()

    rec(frozenset(order), [], 0)
    _close_under_edge_deletion(found)
    return ModelFolio(X, delta, found)


def brute_folio_by_search(G: Graph, X: Iterable[int], delta: int, ceiling: int = PATTERN_CEILING) -> ModelFolio:
    """Same folio, computed pattern by pattern with minor_search."""
    X = frozenset(X)
    mf = ModelFolio(X, delta, {})
    for p in enumerate_patterns(X, delta, ceiling):
        m = minor_search(G, X, p)
        if m is not None:
            mf.witness[p] = m
    return mf


# ---------------------------------------------------------------------------
# composition across a separation


def _combine(pa: RootedGraph, pb: RootedGraph, X: FrozenSet[int]):
    """X-combination of two rooted graphs.

    Returns (roots, edges, members) on component labels 0..c-1 where members
    lists the ('a', u) / ('b', v) vertices merged into each component.
    """
    na, nb = pa.n, pb.n
    # union-find over a-vertices 0..na-1 and b-vertices na..na+nb-1
    parent = list(range(na + nb))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner = {}
    for u in range(na):
        for r in pa.roots[u]:
            owner[r] = u
    for v in range(nb):
        for r in pb.roots[v]:
            if r in owner:
                a, b = find(owner[r]), find(na + v)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    label = {}
    members = []
    for x in range(na + nb):
        rt = find(x)
        if rt not in label:
            label[rt] = len(members)
            members.append([])
        members[label[rt]].append(("a", x + 1) if x < na else ("b", x - na + 1))
    comp = [label[find(x)] for x in range(na + nb)]
    roots = {}
    for c, mem in enumerate(members):
        rs = set()
        for side, u in mem:
            rs.update(pa.roots[u - 1] if side == "a" else pb.roots[u - 1])
        roots[c] = tuple(sorted(rs & X))
    edges = set()
    for u, v in pa.edges():
        a, b = comp[u - 1], comp[v - 1]
        if a != b:
            edges.add((min(a, b), max(a, b)))
    for u, v in pb.edges():
        a, b = comp[na + u - 1], comp[na + v - 1]
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return roots, sorted(edges), members


def _check_roots(ra, rb, X):
    if not frozenset(X) <= frozenset(ra) | frozenset(rb):
        raise GraphError("X must be covered by the root sets of the two folios")


def compose_folios(FA: Folio, FB: Folio, X: Iterable[int], delta: int) -> Folio:
    X = frozenset(X)
    _check_roots(FA.roots, FB.roots, X)
    out = set()
    for pa in FA.members:
        for pb in FB.members:
            roots, edges, _ = _combine(pa, pb, X)
            if sum(1 for r in roots.values() if not r) > delta:
                continue
            out.add(canonicalize(roots, edges)[0])
    return Folio(frozenset(out), X, delta)


def compose_model_folios(MA: ModelFolio, MB: ModelFolio, X: Iterable[int], delta: int) -> ModelFolio:
    """Composition with witnesses: each new branch set is the union of the
    branch sets of the pattern vertices merged into it."""
    X = frozenset(X)
    _check_roots(MA.roots, MB.roots, X)
    out: Dict[RootedGraph, MinorModel] = {}
    for pa in MA.sorted_members():
        wa = MA.witness[pa]
        for pb in MB.sorted_members():
            roots, edges, members = _combine(pa, pb, X)
            if sum(1 for r in roots.values() if not r) > delta:
                continue
            p, relabel = canonicalize(roots, edges)
            if p in out:
                continue
            wb = MB.witness[pb]
            model = {}
            for c, mem in enumerate(members):
                b = set()
                for side, u in mem:
                    b |= wa[u] if side == "a" else wb[u]
                model[relabel[c]] = frozenset(b)
            out[p] = model
    return ModelFolio(X, delta, out)


def restrict_roots(MF: ModelFolio, X: Iterable[int], delta: int | None = None) -> ModelFolio:
    """Forget roots outside X, keeping members whose detail stays bounded.

    Branch sets are unchanged, so witnesses stay valid for the smaller X.
    """
    X = frozenset(X)
    delta = MF.delta if delta is None else delta
    out: Dict[RootedGraph, MinorModel] = {}
    for p in MF.sorted_members():
        roots = {u: tuple(r for r in p.roots[u - 1] if r in X) for u in p.vertices}
        if sum(1 for r in roots.values() if not r) > delta:
            continue
        q, relabel = canonicalize(roots, p.edges())
        if q not in out:
            out[q] = relabel_model(MF.witness[p], relabel)
    return ModelFolio(X, delta, out)


def restrict_detail(MF: ModelFolio, delta: int) -> ModelFolio:
    return ModelFolio(MF.roots, delta, {p: m for p, m in MF.witness.items() if p.detail <= delta})


def is_generic(F) -> bool:
    members = F.members
    return frozenset(members) == frozenset(enumerate_patterns(F.roots, F.delta))


def all_witnesses_valid(G: Graph, MF: ModelFolio) -> bool:
    from .graph import validate_model

    return all(validate_model(G, MF.roots, p, m) for p, m in MF.witness.items())
