"""Profiles, intrusions, preservers, replacements and model mappers.

A replacement swaps each component C of G - Y for a small graph phi(C)
glued along bd(C). The mapper remembers enough to turn any model in the
replaced graph back into a model in the original one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .carving import is_chip
from .cuts import important_separators
from .errors import GraphError, PreconditionError, ResourceLimit
from .graph import Graph, MinorModel, RootedGraph, canonicalize
from .oracle import ModelFolio, brute_folio

INTRUSION_ROOT_LIMIT = 6
CANDIDATE_LIMIT = 4000


# ---------------------------------------------------------------------------
# profiles and intrusions


@dataclass(frozen=True)
class Profile:
    vertices: FrozenSet[int]
    edges: FrozenSet[Tuple[int, int]]

    def contains(self, other: "Profile") -> bool:
        """True iff this profile is a supergraph of ``other`` on the same roots."""
        return self.vertices == other.vertices and other.edges <= self.edges


def profile_of(G: Graph, X: Iterable[int]) -> Profile:
    X = frozenset(X)
    if not X <= G.vertices:
        raise GraphError("X must be a subset of V(G)")
    edges = set()
    for comp in G.components():
        for a, b in combinations(sorted(comp & X), 2):
            edges.add((a, b))
    return Profile(X, frozenset(edges))


def _profile_inside(G: Graph, C: FrozenSet[int], roots: FrozenSet[int]) -> Profile:
    edges = set()
    for comp in G.components(C):
        for a, b in combinations(sorted(comp & roots), 2):
            edges.add((a, b))
    return Profile(roots, frozenset(edges))


@dataclass(frozen=True)
class IntrusionSpec:
    X: FrozenSet[int]
    p: int
    X_I: FrozenSet[int]
    X_S: FrozenSet[int]
    profile: Profile

    def __post_init__(self):
        for name in ("X", "X_I", "X_S"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if self.X_I & self.X_S:
            raise PreconditionError("X_I and X_S must be disjoint")
        if not (self.X_I | self.X_S) <= self.X:
            raise PreconditionError("X_I and X_S must lie in X")
        if self.profile.vertices != self.X_I:
            raise PreconditionError("profile must live on X_I")


def is_intrusion(G: Graph, spec: IntrusionSpec, C: Iterable[int]) -> bool:
    C = frozenset(C)
    if spec.p < 0 or C & spec.X != spec.X_I:
        return False
    if any(not (comp & spec.X_I) for comp in G.components(C)):
        return False
    if not _profile_inside(G, C, spec.X_I).contains(spec.profile):
        return False
    return len(G.neighborhood(C) - spec.X_S) <= spec.p


def _intrusion_candidates(G: Graph, X, X_I, X_S, p):
    """Reach sets of important separators, as (size, boundary, profile, set)."""
    H = G.without(X_S)
    B = X - X_I - X_S
    out = []
    for S in important_separators(H, X_I, B, p):
        if S & X_I:
            continue
        C = H.reach(X_I, S)
        if C & X != X_I:
            continue
        boundary = len(G.neighborhood(C) - X_S)
        out.append((len(C), boundary, _profile_inside(G, C, X_I), C))
    return out


def max_intrusion(G: Graph, spec: IntrusionSpec) -> Optional[Tuple[int, FrozenSet[int]]]:
    """Largest intrusion as (size, set), or None when there is none."""
    if spec.p < 0:
        return None
    if not spec.X <= G.vertices:
        raise PreconditionError("X must be a subset of V(G)")
    if not spec.X_I:
        return (0, frozenset())
    best = None
    for size, boundary, prof, C in _intrusion_candidates(G, spec.X, spec.X_I, spec.X_S, spec.p):
        if boundary <= spec.p and prof.contains(spec.profile):
            if best is None or size > best[0]:
                best = (size, C)
    return best


def _profiles_on(roots: FrozenSet[int]):
    slots = list(combinations(sorted(roots), 2))
    for mask in range(1 << len(slots)):
        yield Profile(roots, frozenset(slots[i] for i in range(len(slots)) if mask >> i & 1))


def _root_splits(X: FrozenSet[int]):
    xs = sorted(X)
    for labels in product((0, 1, 2), repeat=len(xs)):
        xi = frozenset(x for x, l in zip(xs, labels) if l == 1)
        xsep = frozenset(x for x, l in zip(xs, labels) if l == 2)
        yield xi, xsep


class IntrusionTable:
    """Max intrusion sizes of one graph for all specs up to p."""

    def __init__(self, G: Graph, X: Iterable[int], p: int):
        self.X = frozenset(X)
        self.p = p
        if len(self.X) > INTRUSION_ROOT_LIMIT:
            raise ResourceLimit(f"intrusion check over {len(self.X)} roots is over the limit")
        self.cands = {}
        if p >= 0:
            for xi, xs in _root_splits(self.X):
                if xi:
                    self.cands[(xi, xs)] = _intrusion_candidates(G, self.X, xi, xs, p)

    def best(self, xi, xs, p, prof) -> int:
        """Largest intrusion size, -1 when none exists."""
        if p < 0:
            return -1
        if not xi:
            return 0 if not prof.vertices else -1
        return max((s for s, b, pr, _ in self.cands[(xi, xs)] if b <= p and pr.contains(prof)), default=-1)

    def dominated_by(self, other: "IntrusionTable") -> bool:
        """True iff no intrusion here is larger than the best one in other."""
        for (xi, xs), cands in self.cands.items():
            for size, boundary, prof, _ in cands:
                if boundary > self.p:
                    continue
                # the best value in other only grows with p, so the
                # smallest p admitting this intrusion is the binding one
                for sub in _subprofiles(prof):
                    if other.best(xi, xs, boundary, sub) < size:
                        return False
        return True


def _subprofiles(prof: Profile):
    es = sorted(prof.edges)
    for mask in range(1 << len(es)):
        yield Profile(prof.vertices, frozenset(es[i] for i in range(len(es)) if mask >> i & 1))


def _same_on(G: Graph, H: Graph, X) -> bool:
    return G.subgraph(X) == H.subgraph(X)


def is_preserver(G: Graph, H: Graph, X: Iterable[int], delta: int, p: int,
                 folio_of_G: Optional[ModelFolio] = None, table_of_G: Optional[IntrusionTable] = None) -> bool:
    """Whether H is an (X, delta, p)-preserver of G.

    Requires G[X] = H[X], equal (X, delta)-folios and, for every p' <= p and
    every intrusion spec, a largest intrusion in H no bigger than in G.
    """
    X = frozenset(X)
    if not (X <= G.vertices and X <= H.vertices):
        raise PreconditionError("X must be in both graphs")
    if not _same_on(G, H, X):
        return False
    fg = folio_of_G if folio_of_G is not None else brute_folio(G, X, delta)
    if brute_folio(H, X, delta).members != fg.members:
        return False
    if p < 0:
        return True
    tg = table_of_G if table_of_G is not None else IntrusionTable(G, X, p)
    return IntrusionTable(H, X, p).dominated_by(tg)


def _candidates(G: Graph, X: FrozenSet[int], size_budget: int):
    """Graphs H on X plus extra vertices with H[X] = G[X], smallest first."""
    xs = sorted(X)
    base = G.subgraph(X)
    top = min(size_budget, len(G))
    start = max(xs) + 1 if xs else 0
    for n_extra in range(0, top - len(xs) + 1):
        extra = list(range(start, start + n_extra))
        slots = list(combinations(extra, 2)) + [(x, e) for e in extra for x in xs]
        seen = set()
        for m in range(len(slots) + 1):
            batch = []
            for es in combinations(slots, m):
                roots = {x: (x,) for x in xs}
                roots.update({e: () for e in extra})
                key = canonicalize(roots, list(es))[0]
                if key in seen:
                    continue
                seen.add(key)
                batch.append((key, es))
            for key, es in sorted(batch):
                H = base.copy()
                for e in extra:
                    H.add_vertex(e)
                for u, v in es:
                    H.add_edge(u, v)
                yield H


def find_preserver(G: Graph, X: Iterable[int], delta: int, p: int, size_budget: int,
                   folio: Optional[ModelFolio] = None, candidate_limit: int = CANDIDATE_LIMIT) -> Graph:
    """Smallest verified (X, delta, p)-preserver with at most size_budget
    vertices, or G itself when none turns up within the candidate limit.

    Candidates are tried by vertex count, then edge count, then canonical
    order; ones that are not smaller than G are skipped.
    """
    X = frozenset(X)
    if not X <= G.vertices:
        raise PreconditionError("X must be a subset of V(G)")
    if size_budget < len(X):
        raise PreconditionError("size budget must be at least |X|")
    fg = folio if folio is not None else brute_folio(G, X, delta)
    tg = None
    tried = 0
    for H in _candidates(G, X, size_budget):
        if H.size() >= G.size():
            continue
        tried += 1
        if tried > candidate_limit:
            break
        if not _same_on(G, H, X):
            continue
        if brute_folio(H, X, delta).members != fg.members:
            continue
        if p >= 0:
            if tg is None:
                tg = IntrusionTable(G, X, p)
            if not IntrusionTable(H, X, p).dominated_by(tg):
                continue
        return H
    return G


# ---------------------------------------------------------------------------
# replacements


@dataclass(frozen=True)
class ReplacementMap:
    Y: FrozenSet[int]
    phi: Dict[FrozenSet[int], Graph]
    bd: Dict[FrozenSet[int], FrozenSet[int]]


@dataclass
class ReplacementStep:
    Y: FrozenSet[int]
    parts: List[Tuple[FrozenSet[int], Graph, FrozenSet[int], ModelFolio]]
    replaced: Tuple[FrozenSet[int], ...] = ()


@dataclass
class ModelMapper:
    """Chain of replacements, oldest first."""

    steps: List[ReplacementStep] = field(default_factory=list)

    def extend(self, other: "ModelMapper") -> "ModelMapper":
        return ModelMapper(self.steps + other.steps)

    def map_model(self, model: MinorModel) -> MinorModel:
        for step in reversed(self.steps):
            model = _map_back(step, model)
        return model

    def map_folio(self, mf: ModelFolio) -> ModelFolio:
        return ModelFolio(mf.roots, mf.delta, {p: self.map_model(m) for p, m in mf.witness.items()})


def _map_back(step: ReplacementStep, model: MinorModel) -> MinorModel:
    out = {v: set(b) for v, b in model.items()}
    for _, phi, bd, stored in step.parts:
        inside = phi.vertices
        pieces = []
        for v in sorted(model):
            part = model[v] & inside
            for D in phi.components(part):
                pieces.append((v, D))
        if not pieces:
            continue
        roots = {i: tuple(sorted(D & bd)) for i, (_, D) in enumerate(pieces)}
        edges = []
        for i, j in combinations(range(len(pieces)), 2):
            Di, Dj = pieces[i][1], pieces[j][1]
            if any(phi.neighbors(x) & Dj for x in Di):
                edges.append((i, j))
        pattern, relabel = canonicalize(roots, edges)
        if pattern not in stored.witness:
            raise GraphError("stored folio lacks a pattern needed to map a model back")
        wit = stored.witness[pattern]
        for v in out:
            out[v] -= inside
        for i, (v, _) in enumerate(pieces):
            out[v] |= wit[relabel[i]]
    return {v: frozenset(b) for v, b in out.items()}


def replace(G: Graph, rmap: ReplacementMap, X: Iterable[int], delta: int,
            stored_folios: Dict[FrozenSet[int], ModelFolio]):
    """Build the (Y, phi, bd)-replacement of G and the step that maps models
    of it back to G."""
    X = frozenset(X)
    Y = frozenset(rmap.Y)
    if not X <= Y:
        raise PreconditionError("roots must lie in Y")
    comps = G.components(G.vertices - Y)
    if set(map(frozenset, comps)) != set(rmap.phi):
        raise PreconditionError("phi must be given for exactly the components of G - Y")
    H = G.subgraph(Y)
    used_fresh = set()
    parts = []
    for C in comps:
        C = frozenset(C)
        phi, bd = rmap.phi[C], frozenset(rmap.bd[C])
        if phi.vertices & G.vertices != bd:
            raise PreconditionError("bd(C) must be V(phi(C)) & V(G)")
        if not G.neighborhood(C) <= bd <= Y:
            raise PreconditionError("bd(C) must contain N(C) and lie in Y")
        if phi.subgraph(bd) != G.subgraph(bd):
            raise PreconditionError("phi(C) must agree with G on bd(C)")
        fresh = phi.vertices - bd
        if fresh & used_fresh:
            raise PreconditionError("replacement vertex sets must be disjoint")
        used_fresh |= fresh
        for v in phi:
            H.add_vertex(v)
        for u, v in phi.edges():
            H.add_edge(u, v)
        parts.append((C, phi, bd, stored_folios[C]))
    H.reserve(max(G.next_id, H.next_id))
    return H, ReplacementStep(Y, parts)


def replace_chips(G: Graph, X: Iterable[int], k: int, delta: int, chips, chip_folios: Dict[FrozenSet[int], ModelFolio],
                  alpha: int, size_budget: Optional[int] = None, candidate_limit: int = CANDIDATE_LIMIT):
    """Replace every chip C by a small (N(C), delta, k-1)-preserver of G[N[C]].

    Returns (H, mapper). Chips whose preserver search finds nothing smaller
    stay in place; ``mapper.steps[-1].replaced`` lists the ones swapped out.
    """
    X = frozenset(X)
    chips = [frozenset(C) for C in chips]
    if not chips:
        return G.copy(), ModelMapper([])
    for C in chips:
        if not is_chip(G, X, k, alpha, C):
            raise PreconditionError(f"not an (X,{k},{alpha})-chip: {sorted(C)}")
    for a, b in combinations(chips, 2):
        if a & b or G.neighborhood(a) & b:
            raise PreconditionError("chips must be pairwise non-touching")
    budget = alpha // 2 if size_budget is None else size_budget
    ids = G.copy()
    phi, bd, replaced = {}, {}, []
    for C in sorted(chips, key=min):
        border = G.neighborhood(C)
        local = G.subgraph(C | border)
        H = find_preserver(local, border, delta, k - 1, max(budget, len(border)),
                           folio=chip_folios[C], candidate_limit=candidate_limit)
        if H is local:
            # no smaller preserver found: the chip stays where it is
            continue
        extra = sorted(H.vertices - border)
        rename = dict(zip(extra, ids.take_ids(len(extra))))
        rename.update({b: b for b in border})
        phi[C] = Graph([rename[v] for v in H], [(rename[u], rename[v]) for u, v in H.edges()])
        bd[C] = border
        replaced.append(C)
    if not replaced:
        return G.copy(), ModelMapper([])
    Y = G.vertices - frozenset().union(*replaced)
    out, step = replace(G, ReplacementMap(Y, phi, bd), X, delta, chip_folios)
    out.reserve(ids.next_id)
    step.replaced = tuple(replaced)
    return out, ModelMapper([step])
