"""End-to-end folio computation, clique-minor search and disjoint paths.

The pipeline is correct for every input, but it only runs in reasonable time
when chip replacement and separations bring the pieces down to the
brute-force cutoff. Compact pieces above the cutoff go to brute force too
(guarded by ``base_limit``).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from math import ceil, log, log2, sqrt
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .carving import find_chips
from .cuts import AboveCap, is_well_linked, min_vertex_cut
from .errors import GraphError, PreconditionError, ResourceLimit
from .graph import Graph, MinorModel, RootedGraph, Separation, canonicalize, contract_sets, unrooted_clique, validate_model
from .oracle import (
    ModelFolio,
    brute_folio,
    compose_model_folios,
    enumerate_patterns,
    restrict_detail,
    restrict_roots,
)
from .preservers import CANDIDATE_LIMIT, ModelMapper, replace_chips


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the recursion.

    ``size_budget`` and ``alpha`` default per instance to |X|+delta+4 and
    twice that. ``density_c`` turns on the edge-density clique shortcut; it
    is only sound if the constant is large enough. ``depth_guard`` defaults
    to 64*k*ceil(log2(n+2)).
    """

    cutoff: int = 10
    size_budget: Optional[int] = None
    alpha: Optional[int] = None
    density_c: Optional[float] = None
    splitter: str = "auto"
    seed: int = 0
    depth_guard: Optional[int] = None
    candidate_limit: int = CANDIDATE_LIMIT
    base_limit: int = 14

    def __post_init__(self):
        if self.cutoff < 1:
            raise GraphError("cutoff must be at least 1")
        if self.alpha is not None and self.alpha < 1:
            raise GraphError("alpha must be at least 1")
        if self.size_budget is not None and self.size_budget < 0:
            raise GraphError("size budget must be non-negative")

    def budget_for(self, roots: int, delta: int) -> int:
        return self.size_budget if self.size_budget is not None else roots + delta + 4

    def alpha_for(self, roots: int, delta: int) -> int:
        return self.alpha if self.alpha is not None else 2 * (roots + delta + 4)

    def guard_for(self, k: int, n: int) -> int:
        if self.depth_guard is not None:
            return self.depth_guard
        return 64 * max(k, 1) * ceil(log2(n + 2))


DEFAULT_CONFIG = SolverConfig()


# ---------------------------------------------------------------------------
# balanced separations or well-linked sets


@dataclass(frozen=True)
class ReedOutcome:
    """Either a balanced separation of order <= 3k or a well-linked 3k-set."""

    k: int
    beta: float
    separation: Optional[Separation] = None
    wset: Optional[FrozenSet[int]] = None

    @property
    def is_separation(self) -> bool:
        return self.separation is not None


def _split_components(comps: List[FrozenSet[int]]) -> Tuple[set, set]:
    """Two groups of components, each holding at most 2/3 of the vertices,
    assuming no component holds more than half."""
    total = sum(len(c) for c in comps)
    comps = sorted(comps, key=lambda c: (-len(c), min(c)))
    left, right = set(), set()
    for c in comps:
        if len(left) * 3 < total:
            left |= c
        else:
            right |= c
    return left, right


def _bfs_tree(H: Graph, root: int) -> Tuple[Dict[int, List[int]], List[int]]:
    children: Dict[int, List[int]] = {v: [] for v in H}
    order = [root]
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in sorted(H.neighbors(v)):
            if u not in seen:
                seen.add(u)
                children[v].append(u)
                order.append(u)
                queue.append(u)
    return children, order


def _rich_vertex(children, order, k: int, beta: float) -> Optional[int]:
    size = {}
    for v in reversed(order):
        size[v] = 1 + sum(size[c] for c in children[v])
    for v in sorted(order):
        kids = children[v]
        if len(kids) <= 3 * k:
            continue
        small = sorted(size[c] for c in kids)[: len(kids) - 3 * k]
        if sum(small) >= beta - 1:
            return v
    return None


def _heavy_subtrees(children, order, beta: float) -> List[FrozenSet[int]]:
    """Cut off lowest subtrees with at least beta vertices, bottom-up."""
    remaining: Dict[int, List[int]] = {}
    out = []
    for v in reversed(order):
        mine = [v]
        for c in children[v]:
            mine.extend(remaining.pop(c, ()))
        if len(mine) >= beta:
            out.append(frozenset(mine))
        else:
            remaining[v] = mine
    return out


def _test_set(G: Graph, W: FrozenSet[int], k: int, beta: float) -> ReedOutcome:
    res = is_well_linked(G, W)
    if res:
        return ReedOutcome(k, beta, wset=W)
    return ReedOutcome(k, beta, separation=res.separation)


def reed(G: Graph, k: int, avoid: Iterable[int] = ()) -> ReedOutcome:
    """Balanced separation of order <= 3k or a well-linked set of size 3k.

    When n <= 100k^2 the answer is the trivial separation ({u}, V); u is
    the least vertex outside ``avoid`` when there is one.
    """
    if k < 1:
        raise PreconditionError("k must be at least 1")
    V = G.vertices
    n = len(V)
    if n == 0:
        raise PreconditionError("graph must be nonempty")
    beta = n / (100 * k * k)
    if beta <= 1:
        free = sorted(V - frozenset(avoid)) or sorted(V)
        u = free[0]
        return ReedOutcome(k, beta, separation=Separation(frozenset([u]), V))
    S: set = set()
    for _ in range(3 * k):
        comps = G.components(V - S)
        big = [c for c in comps if len(c) * 2 > n]
        if not big:
            left, right = _split_components(comps)
            return ReedOutcome(k, beta, separation=Separation(frozenset(S | left), frozenset(S | right)))
        H = G.subgraph(big[0])
        children, order = _bfs_tree(H, min(big[0]))
        rich = _rich_vertex(children, order, k, beta)
        if rich is not None:
            S.add(rich)
            continue
        subtrees = _heavy_subtrees(children, order, beta)
        # there are at least 3k of them when no vertex is rich
        assert len(subtrees) >= 3 * k, "subtree family too small"
        W = frozenset(min(L) for L in subtrees[: 3 * k])
        return _test_set(G, W, k, beta)
    return _test_set(G, frozenset(S), k, beta)


# ---------------------------------------------------------------------------
# chips


def carvable_set(G: Graph, X: Iterable[int], k: int, alpha: int) -> FrozenSet[int]:
    """Every (X, k, alpha)-carvable vertex.

    A chip C is a full component of G - N(C), so it suffices to look at
    the components avoiding X of G - S for all |S| < k.
    """
    X = frozenset(X)
    if not X <= G.vertices:
        raise GraphError("X must be a subset of V(G)")
    out: set = set()
    if k < 1:
        return frozenset()
    for size in range(k):
        for S in combinations(sorted(G.vertices), size):
            for C in G.components(G.vertices - frozenset(S)):
                if len(C) >= alpha and not (C & X) and C - out:
                    out |= C
    return frozenset(out)


def count_carvable(G: Graph, X: Iterable[int], k: int, alpha: int) -> int:
    return len(carvable_set(G, X, k, alpha))


def largest_chip(G: Graph, X: Iterable[int], k: int, alpha: int) -> int:
    """Balance of (G, X): the size of a largest chip, 0 if none."""
    X = frozenset(X)
    best = 0
    for size in range(max(k, 0)):
        for S in combinations(sorted(G.vertices), size):
            for C in G.components(G.vertices - frozenset(S)):
                if len(C) >= alpha and not (C & X):
                    best = max(best, len(C))
    return best


# ---------------------------------------------------------------------------
# existence recursion


@dataclass(frozen=True)
class CliqueFlag:
    """The graph has K_h as a minor (no model attached)."""

    h: int


FolioOrClique = Union[ModelFolio, CliqueFlag]


class _CliqueFound(Exception):
    pass


def _induced_instance(G: Graph, X: FrozenSet[int], A: FrozenSet[int], B: FrozenSet[int]):
    return G.subgraph(A), (X & A) | (A & B)


class _Existence:
    def __init__(self, G: Graph, X: FrozenSet[int], delta: int, h: int, cfg: SolverConfig):
        self.cfg = cfg
        self.h = h
        # K_h cannot be a minor of a graph with fewer than h vertices
        self.track = 2 <= h <= len(G)
        self.delta = max(delta, h) if self.track else delta
        self.clique = unrooted_clique(h) if self.track else None
        self.k = len(X) + 1
        self.alpha = cfg.alpha_for(len(X), self.delta)
        self.budget = cfg.size_budget
        self.guard = cfg.guard_for(self.k, len(G))

    def _check(self, mf: ModelFolio) -> ModelFolio:
        if self.clique is not None and self.clique in mf:
            raise _CliqueFound()
        return mf

    def base(self, G: Graph, X: FrozenSet[int]) -> ModelFolio:
        if len(G) > self.cfg.base_limit:
            raise ResourceLimit(f"compact piece with {len(G)} vertices is above the brute-force limit")
        return self._check(brute_folio(G, X, self.delta))

    def compose(self, FA: ModelFolio, FB: ModelFolio, X: FrozenSet[int]) -> ModelFolio:
        return self._check(compose_model_folios(FA, FB, X, self.delta))

    def split(self, G, X, sep: Separation, depth) -> ModelFolio:
        GA, XA = _induced_instance(G, X, sep.A, sep.B)
        GB, XB = _induced_instance(G, X, sep.B, sep.A)
        return self.compose(self.run(GA, XA, depth + 1), self.run(GB, XB, depth + 1), X)

    def dense(self, G: Graph) -> bool:
        c = self.cfg.density_c
        if c is None or self.clique is None:
            return False
        h = self.h
        return G.number_of_edges() >= c * h * sqrt(log(h)) * len(G)

    def run(self, G: Graph, X: FrozenSet[int], depth: int) -> ModelFolio:
        if depth > self.guard:
            raise ResourceLimit(f"recursion depth guard {self.guard} exceeded")
        assert len(X) <= max(4 * self.k - 1, self.k), "root set grew past 4k-1"
        if self.dense(G):
            raise _CliqueFound()
        rest = G.vertices - X
        if len(G) <= self.cfg.cutoff or not rest:
            return self.base(G, X)
        comps = G.components(rest)
        if len(comps) > 1:
            return self.components(G, X, comps, depth)
        wl = is_well_linked(G, X)
        if not wl:
            return self.split(G, X, wl.separation, depth)
        if len(X) < self.k:
            out = reed(G, self.k, avoid=X)
            if out.is_separation:
                return self.split(G, X, out.separation, depth)
            wide = self.run(G, X | out.wset, depth + 1)
            return restrict_roots(wide, X, self.delta)
        return self.chips(G, X, depth)

    def components(self, G, X, comps, depth) -> ModelFolio:
        pieces = [self.run(G.subgraph(X | C), X, depth + 1) for C in comps]
        while len(pieces) > 1:
            merged = [self.compose(pieces[i], pieces[i + 1], X) for i in range(0, len(pieces) - 1, 2)]
            if len(pieces) % 2:
                merged.append(pieces[-1])
            pieces = merged
        return pieces[0]

    def chips(self, G: Graph, X: FrozenSet[int], depth: int) -> ModelFolio:
        chain = ModelMapper([])
        while True:
            fam = find_chips(G, X, self.k, self.alpha, self.cfg.splitter, self.cfg.seed)
            if not fam.chips:
                break
            folios = {}
            for C in fam.chips:
                border = G.neighborhood(C)
                folios[C] = self.run(G.subgraph(C | border), border, depth + 1)
            H, mapper = replace_chips(G, X, self.k, self.delta, fam.chips, folios, self.alpha,
                                      self.budget, self.cfg.candidate_limit)
            if not mapper.steps:
                break
            G = H
            chain = chain.extend(mapper)
        return chain.map_folio(self.base(G, X))


def folio_or_clique_existence(G: Graph, X: Iterable[int], delta: int, h: int,
                              cfg: Optional[SolverConfig] = None) -> FolioOrClique:
    """The (X, max(delta, h))-model-folio of G, or a flag that K_h is a minor.

    When h exceeds |V(G)| no clique is possible and the folio has detail
    delta.
    """
    cfg = cfg or DEFAULT_CONFIG
    X = frozenset(X)
    if not X <= G.vertices:
        raise GraphError("X must be a subset of V(G)")
    if delta < 0:
        raise GraphError("delta must be non-negative")
    ex = _Existence(G, X, delta, h, cfg)
    try:
        return ex.run(G, X, 0)
    except _CliqueFound:
        return CliqueFlag(h)


# ---------------------------------------------------------------------------
# binary search over edge prefixes


def edge_prefix(G: Graph, i: int) -> Graph:
    """G with only its first i edges in ascending order."""
    return Graph(G.vertices, G.edges()[:i])


@dataclass
class CliqueSearch:
    """Outcome of the edge-prefix search.

    ``index`` is a with phi(a) = folio and phi(a+1) = clique, or None when
    G itself gave a folio. ``probes`` lists every index evaluated.
    """

    folio: Optional[ModelFolio] = None
    model: Optional[MinorModel] = None
    index: Optional[int] = None
    probes: List[int] = field(default_factory=list)


def _clique_member(mf: ModelFolio, h: int) -> Optional[MinorModel]:
    return mf.witness.get(unrooted_clique(h))


def clique_search(G: Graph, X: Iterable[int], delta: int, h: int,
                  cfg: Optional[SolverConfig] = None) -> CliqueSearch:
    if h < 2:
        raise PreconditionError("h must be at least 2")
    X = frozenset(X)
    edges = G.edges()
    m = len(edges)
    out = CliqueSearch()

    def phi(i):
        out.probes.append(i)
        return folio_or_clique_existence(edge_prefix(G, i), X, delta, h, cfg)

    top = phi(m)
    if isinstance(top, ModelFolio):
        out.folio = restrict_detail(top, delta)
        return out
    a, b = 0, m
    while b > a + 1:
        r = (a + b + 1) // 2
        if isinstance(phi(r), ModelFolio):
            a = r
        else:
            b = r
    out.index = a
    low = phi(a)
    model = _clique_member(low, h) if isinstance(low, ModelFolio) else None
    if model is None:
        high = folio_or_clique_existence(edge_prefix(G, a + 1), X, max(delta, h), h + 1, cfg)
        if not isinstance(high, ModelFolio):
            raise AssertionError("one extra edge cannot create K_(h+1)")
        model = _clique_member(high, h)
        if model is None:
            raise AssertionError("prefix graph claimed K_h but its folio lacks it")
    out.model = model
    return out


def folio_or_clique(G: Graph, X: Iterable[int], delta: int, h: int,
                    cfg: Optional[SolverConfig] = None) -> Union[ModelFolio, MinorModel]:
    """The (X, delta)-model-folio of G, or a model of K_h in G."""
    res = clique_search(G, X, delta, h, cfg)
    return res.folio if res.folio is not None else res.model


# ---------------------------------------------------------------------------
# generic folios


def group_branch_sets(M: MinorModel, t: int) -> MinorModel:
    """Merge the branch sets of a K_h model into t groups of near-equal size."""
    h = len(M)
    if t < 1 or t > h:
        raise PreconditionError(f"cannot group {h} branch sets into {t}")
    keys = sorted(M)
    small, extra = divmod(h, t)
    out = {}
    pos = 0
    for i in range(t):
        take = small + (1 if i < extra else 0)
        out[i + 1] = frozenset().union(*(M[u] for u in keys[pos: pos + take]))
        pos += take
    return out


def _separable(G: Graph, X: FrozenSet[int], branch: FrozenSet[int]) -> Optional[Separation]:
    """A separation of order < |X| with X on the A side and branch off it."""
    if branch & X or not X:
        return None
    res = min_vertex_cut(G, X, branch, undeletable=branch, cap=len(X) - 1)
    if isinstance(res, AboveCap):
        return None
    R = res.source_side
    return Separation(R | res.separator, G.vertices - R)


def _universal_model(G: Graph, X: FrozenSet[int], M: MinorModel, W: Sequence[int], k: int):
    """Branch sets {x} + path + eta(w) for rooted vertices and eta(w) for the
    rest, or None when W is not a witnessing clique."""
    H, mapping = contract_sets(G, [M[w] for w in W])
    hub = {mapping[min(M[w])]: w for w in W}
    for c in hub:
        if k and not isinstance(min_vertex_cut(H, X, [c], undeletable=[c], cap=k - 1), AboveCap):
            return None
    rooted: Dict[int, FrozenSet[int]] = {}
    used = set()
    if k:
        flow = min_vertex_cut(H, X, hub.keys())
        if flow.value < k:
            return None
        for path in flow.paths:
            cut = next(i for i, v in enumerate(path) if v in hub)
            path = path[: cut + 1]
            x, w = path[0], hub[path[-1]]
            rooted[x] = frozenset(path[:-1]) | M[w]
            used.add(w)
    free = [M[w] for w in W if w not in used]
    return rooted, free


def generic_extract(G: Graph, X: Iterable[int], delta: int, M: MinorModel,
                    cfg: Optional[SolverConfig] = None) -> ModelFolio:
    """Generic (X, delta)-model-folio from a large enough, inseparable K_h model."""
    X = frozenset(X)
    h = len(M)
    k = len(X)
    if not X <= G.vertices:
        raise GraphError("X must be a subset of V(G)")
    if not validate_model(G, (), unrooted_clique(h), M):
        raise PreconditionError("M is not a model of K_h")
    if h < 3 * k + delta:
        raise PreconditionError(f"need h >= 3|X|+delta = {3 * k + delta}, got {h}")
    for u in sorted(M):
        sep = _separable(G, X, frozenset(M[u]))
        if sep is not None:
            raise PreconditionError(f"branch set {u} is separable from X", witness=sep)
    keep = [u for u in sorted(M) if not (M[u] & X)][: 2 * k + delta]
    model = {u: frozenset(M[u]) for u in keep}
    for W in combinations(keep, k + delta):
        got = _universal_model(G, X, model, W, k)
        if got is not None:
            break
    else:
        raise AssertionError("no witnessing clique among the branch sets")
    rooted, free = got
    out: Dict[RootedGraph, MinorModel] = {}
    for p in enumerate_patterns(X, delta):
        wit = {}
        spare = iter(free)
        for u in p.vertices:
            rs = p.root_set(u)
            wit[u] = frozenset().union(*(rooted[x] for x in rs)) if rs else next(spare)
        out[p] = wit
    return ModelFolio(X, delta, out)


# ---------------------------------------------------------------------------
# folios


class _FolioSolver:
    def __init__(self, cfg: SolverConfig, n: int):
        self.cfg = cfg
        self.n = n

    def solve(self, G: Graph, X: FrozenSet[int], delta: int, depth: int) -> ModelFolio:
        k = len(X)
        guard = self.cfg.guard_for(k, self.n)
        if depth > guard:
            raise ResourceLimit(f"recursion depth guard {guard} exceeded")
        alpha = self.cfg.alpha_for(k, delta)
        chain = ModelMapper([])
        while k >= 1:
            fam = find_chips(G, X, k, alpha, self.cfg.splitter, self.cfg.seed)
            if not fam.chips:
                break
            folios = {}
            for C in fam.chips:
                border = G.neighborhood(C)
                folios[C] = self.solve(G.subgraph(C | border), border, delta, depth + 1)
            H, mapper = replace_chips(G, X, k, delta, fam.chips, folios, alpha,
                                      self.cfg.size_budget, self.cfg.candidate_limit)
            if not mapper.steps:
                break
            G = H
            chain = chain.extend(mapper)
        t = 3 * k + delta
        h = alpha * t
        if h < 2:
            mf = restrict_detail(brute_folio(G, X, delta), delta)
        else:
            res = folio_or_clique(G, X, delta, h, self.cfg)
            if isinstance(res, ModelFolio):
                mf = res
            else:
                mf = generic_extract(G, X, delta, group_branch_sets(res, t), self.cfg)
        return chain.map_folio(mf)


def solve_folio(G: Graph, X: Iterable[int], delta: int, cfg: Optional[SolverConfig] = None) -> ModelFolio:
    """The (X, delta)-model-folio of G."""
    cfg = cfg or DEFAULT_CONFIG
    X = frozenset(X)
    if not X <= G.vertices:
        raise GraphError("X must be a subset of V(G)")
    if delta < 0:
        raise GraphError("delta must be non-negative")
    return _FolioSolver(cfg, len(G)).solve(G, X, delta, 0)


# ---------------------------------------------------------------------------
# disjoint paths


def _path_inside(G: Graph, branch: FrozenSet[int], s: int, t: int) -> List[int]:
    prev = {s: None}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        if v == t:
            break
        for u in sorted(G.neighbors(v) & branch):
            if u not in prev:
                prev[u] = v
                queue.append(u)
    path = [t]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def linkage_pattern(pairs: Sequence[Tuple[int, int]]) -> Tuple[RootedGraph, Dict[int, int]]:
    """The edgeless pattern with one vertex per pair; returns the pattern and
    the canonical vertex of each pair index."""
    pattern, relabel = canonicalize({i: pair for i, pair in enumerate(pairs)})
    return pattern, relabel


def _shortest_path(G: Graph, s: int, t: int, blocked) -> Optional[List[int]]:
    prev = {s: None}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        if v == t:
            path = [t]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for u in sorted(G.neighbors(v)):
            if u not in prev and u not in blocked:
                prev[u] = v
                queue.append(u)
    return None


def _greedy_linkage(G: Graph, pairs) -> Optional[List[List[int]]]:
    """Route pairs one at a time along shortest paths, once per rotation of
    the pair order. Finding paths proves feasibility; failing proves nothing."""
    terms = {v for p in pairs for v in p}
    for first in range(len(pairs)):
        order = list(range(first, len(pairs))) + list(range(first))
        used = set()
        out = {}
        for i in order:
            s, t = pairs[i]
            path = _shortest_path(G, s, t, used | (terms - {s, t}))
            if path is None:
                break
            out[i] = path
            used.update(path)
        else:
            return [out[i] for i in range(len(pairs))]
    return None


def _linkage_by_folio(G: Graph, pairs, cfg) -> Optional[List[List[int]]]:
    pattern, relabel = linkage_pattern(pairs)
    mf = solve_folio(G, [v for p in pairs for v in p], 0, cfg)
    model = mf.witness.get(pattern)
    if model is None:
        return None
    return [_path_inside(G, model[relabel[i]], s, t) for i, (s, t) in enumerate(pairs)]


def disjoint_paths(G: Graph, pairs: Sequence[Tuple[int, int]],
                   cfg: Optional[SolverConfig] = None, shortcuts: bool = True) -> Optional[List[List[int]]]:
    """Vertex-disjoint s_i-t_i paths, one per pair, or None.

    The answer comes from the folio of G rooted at the terminals. With
    ``shortcuts`` a greedy routing is tried first, and each connected
    component gets its own folio over only its own terminals.
    """
    pairs = [tuple(p) for p in pairs]
    terms = [v for p in pairs for v in p]
    if len(set(terms)) != len(terms):
        raise GraphError("terminals must be pairwise distinct")
    if not set(terms) <= G.vertices:
        raise GraphError("terminals must be vertices of G")
    if not pairs:
        return []
    if not shortcuts:
        return _linkage_by_folio(G, pairs, cfg)
    greedy = _greedy_linkage(G, pairs)
    if greedy is not None:
        return greedy
    out: Dict[int, List[int]] = {}
    for comp in G.components():
        local = [i for i, (s, t) in enumerate(pairs) if s in comp or t in comp]
        if not local:
            continue
        if any(not {pairs[i][0], pairs[i][1]} <= comp for i in local):
            return None
        got = _linkage_by_folio(G.subgraph(comp), [pairs[i] for i in local], cfg)
        if got is None:
            return None
        out.update(zip(local, got))
    return [out[i] for i in range(len(pairs))]
