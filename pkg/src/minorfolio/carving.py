"""Terminal carving and chip finding.

A terminal k-chip of (G, z, T, k) is a connected C with z not in C,
C & T nonempty, N(C) & (T + z) empty and |N(C)| < k. An (X, k, alpha)-chip
is a connected C disjoint from X with |C| >= alpha and |N(C)| < k.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from itertools import combinations
from math import ceil, log
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .cuts import AboveCap, isolating_cuts, min_vertex_cut
from .errors import GraphError, PreconditionError, ResourceLimit
from .graph import Graph, contract_sets

EXHAUSTIVE_LIMIT = 16
HASH_FAMILY_LIMIT = 200_000


@dataclass(frozen=True)
class CarvingInstance:
    graph: Graph
    z: int
    terminals: FrozenSet[int]
    k: int

    def __post_init__(self):
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        G = self.graph
        if self.z in self.terminals:
            raise PreconditionError("root terminal z must not be in T")
        tstar = self.terminals | {self.z}
        if not tstar <= G.vertices:
            raise PreconditionError("terminals must be vertices of G")
        if not G.is_independent(tstar):
            raise PreconditionError("T + z must be independent")

    @property
    def tstar(self) -> FrozenSet[int]:
        return self.terminals | {self.z}


def is_terminal_chip(inst: CarvingInstance, C: Iterable[int]) -> bool:
    C = frozenset(C)
    G = inst.graph
    N = G.neighborhood(C)
    return (
        bool(C)
        and G.is_connected(C)
        and inst.z not in C
        and bool(C & inst.terminals)
        and not (N & inst.tstar)
        and len(N) < inst.k
    )


def is_chip(G: Graph, X: Iterable[int], k: int, alpha: int, C: Iterable[int]) -> bool:
    C = frozenset(C)
    return (
        bool(C)
        and not (C & frozenset(X))
        and G.is_connected(C)
        and len(C) >= alpha
        and len(G.neighborhood(C)) < k
    )


# ---------------------------------------------------------------------------
# sparsifiers


@dataclass(frozen=True)
class Sparsified:
    """Result of a sparsifier.

    Capped mu-bar values between subsets of ``kept`` are the same in
    ``graph`` (with ``protected`` undeletable) as in the input graph.
    """

    graph: Graph
    kept: FrozenSet[int]
    protected: FrozenSet[int]


def sparsify(G: Graph, T: Iterable[int], Tp: Iterable[int], k: int, method: str = "identity") -> Sparsified:
    """Shrink G while preserving min(mu-bar, k) between subsets of Tp.

    ``identity`` keeps G and the full protected set. ``gadget`` replaces every
    terminal by a k-clique attached to its neighbourhood and hangs the kept
    terminals off their cliques, so the kept terminals alone need protecting.
    No size reduction happens in either mode.
    """
    T = frozenset(T)
    Tp = frozenset(Tp)
    if not Tp <= T:
        raise PreconditionError("Tp must be a subset of T")
    if not G.is_independent(T):
        raise PreconditionError("T must be independent")
    if method == "identity":
        return Sparsified(G, Tp, T)
    if method != "gadget":
        raise ValueError(f"unknown sparsifier {method!r}")
    H = G.without(T)
    for v in T & G.vertices:
        clique = [H.fresh() for _ in range(k)]
        for a, b in combinations(clique, 2):
            H.add_edge(a, b)
        for w in clique:
            for u in G.neighbors(v):
                H.add_edge(w, u)
        if v in Tp:
            H.add_vertex(v)
            for w in clique:
                H.add_edge(v, w)
    return Sparsified(H, Tp, Tp)


# ---------------------------------------------------------------------------
# representative sets


def _carvable_one(G, t, z, protected, k) -> bool:
    res = min_vertex_cut(G, [t], [z], undeletable=protected, cap=k - 1)
    return not isinstance(res, AboveCap)


def _pushed_sets(G: Graph, z: int, R: List[int], protected, terminals) -> Dict[int, FrozenSet[int]]:
    """T_t for each t in R, given that the T_t are pairwise disjoint."""
    cuts = isolating_cuts(G, protected, list(R) + [z])
    out = {}
    for t in R:
        C = cuts[t]
        border = G.neighborhood(C)
        H = G.subgraph(C | border)
        res = min_vertex_cut(H, [t], border, undeletable=protected & H.vertices)
        out[t] = res.source_side & terminals
    return out


def _representatives(G, z, T, k, protected, method) -> Tuple[List[int], Dict[int, FrozenSet[int]]]:
    T = sorted(T)
    if not T:
        return [], {}
    if len(T) == 1:
        t = T[0]
        return ([t], {}) if _carvable_one(G, t, z, protected, k) else ([], {})
    half = (len(T) + 1) // 2
    sets: Dict[int, FrozenSet[int]] = {}
    found = []
    for part in (T[:half], T[half:]):
        sp = sparsify(G, protected, frozenset(part) | {z}, k, method)
        sub, _ = _representatives(sp.graph, z, part, k, sp.protected, method)
        if sub:
            sets.update(_pushed_sets(G, z, sub, protected, frozenset(T)))
            found.extend(sub)
    order = sorted(found, key=lambda t: (-len(sets[t]), t))
    R = []
    processed = []
    for t in order:
        if not any(t in sets[s] for s in processed):
            R.append(t)
        processed.append(t)
    return sorted(R), {t: sets[t] for t in R}


def representative_set(inst: CarvingInstance, method: str = "identity") -> FrozenSet[int]:
    """A minimal representative set of the carving instance.

    Terminals are split in two halves, each half is solved recursively on a
    sparsified graph, and the pushed sets T_t of the candidates are used to
    keep only one representative per class.
    """
    R, _ = _representatives(inst.graph, inst.z, inst.terminals, inst.k, inst.tstar, method)
    return frozenset(R)


def representative_classes(inst: CarvingInstance, method: str = "identity") -> Dict[int, FrozenSet[int]]:
    """Map each representative t to its pushed set T_t."""
    R, sets = _representatives(inst.graph, inst.z, inst.terminals, inst.k, inst.tstar, method)
    if len(R) == 1 and R[0] not in sets:
        sets = _pushed_sets(inst.graph, inst.z, R, inst.tstar, inst.terminals)
    return sets


def terminal_carving(inst: CarvingInstance, method: str = "identity") -> List[FrozenSet[int]]:
    """Pairwise non-touching terminal k-chips covering every carvable terminal."""
    R = sorted(representative_set(inst, method))
    if not R:
        return []
    cuts = isolating_cuts(inst.graph, inst.tstar, R + [inst.z])
    return sorted((cuts[t] for t in R), key=min)


# ---------------------------------------------------------------------------
# splitters


@dataclass(frozen=True)
class SplitterFamily:
    universe: FrozenSet[int]
    a: int
    b: int
    sets: Tuple[FrozenSet[int], ...]
    mode: str
    guaranteed: bool


def _hash_in(seed: int, j: int, u: int, threshold: float) -> bool:
    h = hashlib.blake2b(f"{j}:{u}".encode(), digest_size=8, key=str(seed).encode()).digest()
    return int.from_bytes(h, "big") / 2**64 < threshold


def splitter_family(U: Iterable[int], a: int, b: int, mode: str = "auto", seed: int = 0) -> SplitterFamily:
    """Sets S of U such that every disjoint A, B with |A| <= a, |B| <= b
    has some S with A <= S and S & B empty.

    ``exhaustive`` is every subset (only for |U| <= 16). ``complement`` is
    {U - B : |B| <= b}. ``auto`` picks the smaller of the two. ``hash`` is a
    seeded pseudorandom family and carries no guarantee.
    """
    U = frozenset(U)
    if a < 0 or b < 0:
        raise GraphError("a and b must be non-negative")
    items = sorted(U)
    if a == 0:
        # A is always empty, so the empty set avoids every B
        return SplitterFamily(U, a, b, (frozenset(),), mode, mode != "hash")
    n_all = 2 ** len(items)
    n_comp = sum(len(list(combinations(items, i))) for i in range(min(b, len(items)) + 1))
    if mode == "auto":
        mode = "exhaustive" if len(items) <= EXHAUSTIVE_LIMIT and n_all <= n_comp else "complement"
    if mode == "exhaustive":
        if len(items) > EXHAUSTIVE_LIMIT:
            raise ResourceLimit(f"exhaustive splitter needs |U| <= {EXHAUSTIVE_LIMIT}")
        sets = tuple(
            frozenset(items[i] for i in range(len(items)) if mask >> i & 1) for mask in range(n_all)
        )
        return SplitterFamily(U, a, b, sets, "exhaustive", True)
    if mode == "complement":
        sets = tuple(U - frozenset(c) for i in range(min(b, len(items)) + 1) for c in combinations(items, i))
        return SplitterFamily(U, a, b, sets, "complement", True)
    if mode == "hash":
        size = ceil(8 * 2 ** (a + b) * (a + b + 1) * log(max(len(items), 2)))
        if size > HASH_FAMILY_LIMIT:
            raise ResourceLimit(f"hash splitter family of {size} sets is over the limit")
        p = a / (a + b) if a + b else 1.0
        sets = tuple(frozenset(u for u in items if _hash_in(seed, j, u, p)) for j in range(size))
        return SplitterFamily(U, a, b, sets, "hash", False)
    raise ValueError(f"unknown splitter mode {mode!r}")


def splitter_covers(fam: SplitterFamily) -> bool:
    """Check the splitter property by brute force."""
    items = sorted(fam.universe)
    for ra in range(min(fam.a, len(items)) + 1):
        for A in combinations(items, ra):
            rest = [u for u in items if u not in A]
            for rb in range(min(fam.b, len(rest)) + 1):
                for B in combinations(rest, rb):
                    A_, B_ = frozenset(A), frozenset(B)
                    if not any(A_ <= S and not (S & B_) for S in fam.sets):
                        return False
    return True


# ---------------------------------------------------------------------------
# chips


@dataclass(frozen=True)
class ChipFamily:
    chips: Tuple[FrozenSet[int], ...]
    guaranteed: bool

    def __iter__(self):
        return iter(self.chips)

    def __len__(self):
        return len(self.chips)

    @property
    def union(self) -> FrozenSet[int]:
        return frozenset().union(*self.chips) if self.chips else frozenset()


def chips_for_set(G: Graph, X: Iterable[int], k: int, alpha: int, S: Iterable[int]) -> List[FrozenSet[int]]:
    """Chips containing every vertex that is lucky for S.

    Contract each component of G[S] with at least alpha vertices to a
    terminal, attach a fresh root z to X, carve, and uncontract.
    """
    X = frozenset(X)
    big = [c for c in G.components(S) if len(c) >= alpha]
    if not big:
        return []
    H, mapping = contract_sets(G, big)
    terminals = frozenset(mapping[min(c)] for c in big)
    z = H.fresh()
    for x in X:
        H.add_edge(z, x)
    inst = CarvingInstance(H, z, terminals, k)
    back: Dict[int, List[int]] = {}
    for v, w in mapping.items():
        back.setdefault(w, []).append(v)
    out = []
    for C in terminal_carving(inst):
        out.append(frozenset(v for w in C for v in back[w]))
    return sorted(out, key=min)


def find_chips(G: Graph, X: Iterable[int], k: int, alpha: int, mode: str = "auto", seed: int = 0) -> ChipFamily:
    """Pairwise non-touching (X, k, alpha)-chips.

    Runs the per-set construction for every set of a splitter family over
    V - X and keeps the family covering the most vertices; the first set
    wins ties.
    """
    X = frozenset(X)
    if k < 1 or alpha > len(G):
        return ChipFamily((), True)
    alpha = max(alpha, 1)
    fam = splitter_family(G.vertices - X, alpha, k - 1, mode, seed)
    best: List[FrozenSet[int]] = []
    best_size = 0
    seen = set()
    for S in fam.sets:
        # only the large components of G[S] matter
        key = frozenset(frozenset(c) for c in G.components(S) if len(c) >= alpha)
        if not key or key in seen:
            continue
        seen.add(key)
        cs = chips_for_set(G, X, k, alpha, S)
        size = sum(len(c) for c in cs)
        if size > best_size:
            best, best_size = cs, size
    return ChipFamily(tuple(best), fam.guaranteed)
