"""Vertex cuts: Menger flows, well-linkedness, mu-bar, important separators
and isolating cuts.

Flows run on the usual split graph (v_in -> v_out with capacity 1, or
unbounded for undeletable vertices). Augmenting paths are found by BFS with
neighbours visited in ascending order, so every result is deterministic.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from itertools import product
from math import ceil, log2
from typing import Dict, FrozenSet, Iterable, List, Optional

from .errors import GraphError, PreconditionError
from .graph import Graph, Separation

INF = 1 << 40
_SRC = -1
_SNK = -2


@dataclass(frozen=True)
class FlowResult:
    value: int
    separator: FrozenSet[int]
    paths: tuple
    source_side: FrozenSet[int]


@dataclass(frozen=True)
class AboveCap:
    """No separator within the cap (or none at all)."""

    cap: Optional[int]


@dataclass(frozen=True)
class WellLinkedWitness:
    well_linked: bool
    separation: Optional[Separation] = None

    def __bool__(self) -> bool:
        return self.well_linked


class _Network:
    def __init__(self, G: Graph, S, T, undeletable):
        r: Dict[int, Dict[int, int]] = {_SRC: {}, _SNK: {}}
        self.orig: Dict[tuple, int] = {}

        def add(a, b, c):
            r.setdefault(a, {})
            r.setdefault(b, {})
            r[a][b] = r[a].get(b, 0) + c
            r[b].setdefault(a, 0)
            self.orig[(a, b)] = self.orig.get((a, b), 0) + c

        for v in G:
            add(2 * v, 2 * v + 1, INF if v in undeletable else 1)
        for u, v in G.edges():
            add(2 * u + 1, 2 * v, INF)
            add(2 * v + 1, 2 * u, INF)
        for s in sorted(S):
            add(_SRC, 2 * s, INF)
        for t in sorted(T):
            add(2 * t + 1, _SNK, INF)
        self.r = r
        self.order = {a: sorted(nb) for a, nb in r.items()}

    def augment(self) -> int:
        """One BFS augmentation; returns the amount pushed (0 if none)."""
        r = self.r
        prev = {_SRC: None}
        queue = deque([_SRC])
        while queue and _SNK not in prev:
            a = queue.popleft()
            for b in self.order[a]:
                if b not in prev and r[a][b] > 0:
                    prev[b] = a
                    queue.append(b)
        if _SNK not in prev:
            return 0
        path = []
        b = _SNK
        while prev[b] is not None:
            path.append((prev[b], b))
            b = prev[b]
        amount = min(r[a][b] for a, b in path)
        for a, b in path:
            r[a][b] -= amount
            r[b][a] += amount
        return amount

    def from_source(self):
        seen = {_SRC}
        queue = deque([_SRC])
        while queue:
            a = queue.popleft()
            for b in self.order[a]:
                if b not in seen and self.r[a][b] > 0:
                    seen.add(b)
                    queue.append(b)
        return seen

    def to_sink(self):
        seen = {_SNK}
        queue = deque([_SNK])
        while queue:
            b = queue.popleft()
            for a in self.order[b]:
                if a not in seen and self.r[a][b] > 0:
                    seen.add(a)
                    queue.append(a)
        return seen

    def paths(self):
        flow = {}
        for (a, b), c in self.orig.items():
            f = c - self.r[a][b]
            if f > 0:
                flow[(a, b)] = f
        out = {}
        for a, b in flow:
            out.setdefault(a, []).append(b)
        for a in out:
            out[a].sort()
        result = []
        while out.get(_SRC):
            node = _SRC
            walk = []
            while node != _SNK:
                nxt = out[node][0]
                flow[(node, nxt)] -= 1
                if flow[(node, nxt)] == 0:
                    out[node].pop(0)
                node = nxt
                if node >= 0 and node % 2 == 0:
                    walk.append(node // 2)
            result.append(tuple(walk))
        return tuple(result)


def min_vertex_cut(
    G: Graph,
    S: Iterable[int],
    T: Iterable[int],
    undeletable: Iterable[int] = (),
    cap: Optional[int] = None,
    side: str = "source",
):
    """Minimum (S,T)-separator avoiding ``undeletable``.

    ``side="source"`` returns the separator closest to S (smallest reach
    set), ``side="sink"`` the one closest to T. Among minimum separators,
    one that avoids S and T is preferred when it exists. Returns AboveCap
    when the minimum exceeds ``cap`` or when no legal separator exists.
    """
    S = frozenset(S)
    T = frozenset(T)
    und = frozenset(undeletable)
    for part in (S, T, und):
        if not part <= G.vertices:
            raise GraphError("cut terminals must be vertices of G")
    res = _min_cut(G, S, T, und, cap, side)
    if isinstance(res, FlowResult) and res.value and not (S | T) <= und:
        inner = _min_cut(G, S, T, und | S | T, res.value, side)
        if isinstance(inner, FlowResult):
            # inner paths may share the now undeletable terminals
            return replace(inner, paths=res.paths)
    return res


def _min_cut(G, S, T, und, cap, side):
    net = _Network(G, S, T, und)
    value = 0
    while True:
        pushed = net.augment()
        if not pushed:
            break
        value += pushed
        if value >= INF or (cap is not None and value > cap):
            return AboveCap(cap)
    if side == "source":
        z = net.from_source()
        sep = frozenset(v for v in G if 2 * v in z and 2 * v + 1 not in z)
    elif side == "sink":
        z = net.to_sink()
        sep = frozenset(v for v in G if 2 * v not in z and 2 * v + 1 in z)
    else:
        raise ValueError("side must be 'source' or 'sink'")
    assert len(sep) == value
    return FlowResult(value, sep, net.paths(), G.reach(S - sep, sep))


def separates(G: Graph, A: Iterable[int], B: Iterable[int], S: Iterable[int]) -> bool:
    """True iff every A-B path meets S."""
    S = frozenset(S)
    return not (G.reach(frozenset(A) - S, S) & frozenset(B))


# ---------------------------------------------------------------------------
# well-linkedness


def is_well_linked(G: Graph, X: Iterable[int]) -> WellLinkedWitness:
    """Decide whether X is well-linked in G.

    For every split of X into (A_X, S_X, B_X), look in G - S_X for a cut
    avoiding X that separates A_X from B_X with fewer than
    min(|A_X|, |B_X|) vertices. Such a cut plus S_X is a separation with
    more roots than separator vertices on both sides.
    """
    X = sorted(frozenset(X))
    if not set(X) <= G.vertices:
        raise GraphError("X must be a subset of V(G)")
    V = G.vertices
    for labels in product((0, 1, 2), repeat=len(X)):
        ax = frozenset(x for x, l in zip(X, labels) if l == 0)
        bx = frozenset(x for x, l in zip(X, labels) if l == 2)
        if not ax or not bx or min(ax) > min(bx):
            continue
        sx = frozenset(x for x, l in zip(X, labels) if l == 1)
        H = G.without(sx)
        res = min_vertex_cut(H, ax, bx, undeletable=ax | bx, cap=min(len(ax), len(bx)) - 1)
        if isinstance(res, AboveCap):
            continue
        R = res.source_side
        sep = Separation(R | res.separator | sx, V - R)
        return WellLinkedWitness(False, sep)
    return WellLinkedWitness(True)


# ---------------------------------------------------------------------------
# mu-bar


def _check_independent(G: Graph, I):
    if not frozenset(I) <= G.vertices:
        raise PreconditionError("terminal set must be vertices of G")
    if not G.is_independent(I):
        raise PreconditionError("terminal set is not independent")


def mu_bar(G: Graph, I: Iterable[int], A: Iterable[int], B: Iterable[int]) -> int:
    """Size of a smallest (A,B)-separator disjoint from the independent set I."""
    I = frozenset(I)
    A = frozenset(A)
    B = frozenset(B)
    _check_independent(G, I)
    if not (A <= I and B <= I) or A & B:
        raise PreconditionError("A and B must be disjoint subsets of I")
    if not A or not B:
        return 0
    res = min_vertex_cut(G, A, B, undeletable=I)
    assert not isinstance(res, AboveCap)
    return res.value


def mu_bar_set(G: Graph, I: Iterable[int], S: Iterable[int]) -> int:
    """mu-bar(S) = mu-bar(S, I - S)."""
    I = frozenset(I)
    S = frozenset(S)
    return mu_bar(G, I, S, I - S)


# ---------------------------------------------------------------------------
# important separators


def _farthest_min_cut(G: Graph, sources, sinks, forced, k):
    res = min_vertex_cut(G, sources, sinks, undeletable=forced, cap=k, side="sink")
    return None if isinstance(res, AboveCap) else res


def _is_minimal(G, A, B, S):
    return all(not separates(G, A, B, S - {v}) for v in S)


def important_separators(G: Graph, A: Iterable[int], B: Iterable[int], k: int) -> List[FrozenSet[int]]:
    """All important (A,B)-separators of size at most k.

    Branching: take the minimum separator farthest from A, pick its least
    vertex v, and either delete v (budget k-1) or force v onto the A side.
    The candidates found this way include every important separator; a
    final pass drops those that are not minimal or are dominated.
    """
    A = frozenset(A)
    B = frozenset(B)
    if k < 0:
        return []
    cands = set()

    def rec(H: Graph, forced: FrozenSet[int], deleted: FrozenSet[int], budget: int):
        res = _farthest_min_cut(H, A & H.vertices | forced, B & H.vertices, forced, budget)
        if res is None:
            return
        if res.value == 0:
            cands.add(deleted)
            return
        v = min(res.separator)
        if budget >= 1:
            rec(H.without([v]), forced, deleted | {v}, budget - 1)
        rec(H, forced | {v}, deleted, budget)

    rec(G, frozenset(), frozenset(), k)
    reach = {S: G.reach(A - S, S) for S in cands}
    out = []
    for S in cands:
        if not _is_minimal(G, A, B, S):
            continue
        R = reach[S]
        if any(len(T) <= len(S) and R < reach[T] for T in cands):
            continue
        out.append(S)
    return sorted(out, key=lambda s: (len(s), sorted(s)))


# ---------------------------------------------------------------------------
# isolating cuts


def isolating_cuts(G: Graph, T: Iterable[int], Tp: Iterable[int]) -> Dict[int, FrozenSet[int]]:
    """For each t in Tp, a connected C_t with C_t & Tp = {t}, N(C_t) & T
    empty and |N(C_t)| = mu-bar(t, Tp - t); the sets are pairwise
    non-touching.

    Uses ceil(log2 |Tp|) bipartition cuts to split the terminals into
    private regions, then one local minimum cut per terminal.
    """
    T = frozenset(T)
    Tp = sorted(frozenset(Tp))
    _check_independent(G, T)
    if not set(Tp) <= T or not Tp:
        raise PreconditionError("Tp must be a nonempty subset of T")
    if len(Tp) == 1:
        t = Tp[0]
        return {t: G.reach([t])}
    removed = set()
    for bit in range(ceil(log2(len(Tp)))):
        left = frozenset(t for i, t in enumerate(Tp) if not (i >> bit) & 1)
        right = frozenset(Tp) - left
        res = min_vertex_cut(G, left, right, undeletable=T)
        removed |= res.separator
    rest = G.without(removed)
    out = {}
    for t in Tp:
        region = rest.reach([t])
        border = G.neighborhood(region)
        H = G.subgraph(region | border)
        res = min_vertex_cut(H, [t], border, undeletable=T & H.vertices)
        out[t] = res.source_side
    return out
