import random
from itertools import combinations
from math import ceil, log2

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import brute
import crafted
import minorfolio.solver as solver
from minorfolio.cuts import is_well_linked
from minorfolio.errors import GraphError, PreconditionError
from minorfolio.graph import EMPTY_PATTERN, Graph, is_separation, unrooted_clique, validate_model
from minorfolio.oracle import ModelFolio, all_witnesses_valid, brute_folio, is_generic
from minorfolio.solver import (
    CliqueFlag,
    SolverConfig,
    clique_search,
    count_carvable,
    disjoint_paths,
    edge_prefix,
    folio_or_clique,
    folio_or_clique_existence,
    generic_extract,
    group_branch_sets,
    largest_chip,
    reed,
    solve_folio,
)

# small cutoff and alpha so that tiny graphs go through the recursion
FORCING = SolverConfig(cutoff=2, alpha=10, size_budget=3)


def clique(n):
    return Graph(range(n), combinations(range(n), 2))


def path(n):
    return Graph(range(n), [(i, i + 1) for i in range(n - 1)])


def core_with_pendant_paths(length):
    """K4 minus an edge with a path of the given length on three of its vertices."""
    G = Graph(range(4), [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])
    for a in (1, 2, 3):
        prev = a
        for v in G.take_ids(length):
            G.add_edge(prev, v)
            prev = v
    return G


def check_reed(G, k, out):
    n = len(G)
    if out.is_separation:
        sep = out.separation
        assert is_separation(G, sep)
        assert sep.order <= 3 * k
        bound = (1 - 1 / (100 * k * k)) * n
        assert len(sep.A - sep.B) <= bound and len(sep.B - sep.A) <= bound
    else:
        W = out.wset
        assert len(W) == 3 * k
        assert is_well_linked(G, W)
        for sep in brute.separations(G, k):
            if len(sep.A & W) > k:
                assert len(sep.A - sep.B) >= n / (100 * k * k)


def test_reed_trivial_on_small_graphs():
    out = reed(clique(4), 1)
    assert out.separation.A == {0} and out.separation.B == set(range(4))
    with pytest.raises(PreconditionError):
        reed(clique(4), 0)


def test_reed_on_long_path():
    out = reed(path(300), 1)
    assert out.is_separation
    check_reed(path(300), 1, out)


def test_reed_on_large_clique():
    K = clique(301)
    out = reed(K, 1)
    assert not out.is_separation
    assert len(out.wset) == 3 and is_well_linked(K, out.wset)
    # every order-1 separation of a clique has one side equal to V
    for v in (None, 0):
        S = frozenset() if v is None else frozenset({v})
        assert len(K.components(K.vertices - S)) == 1


def test_reed_bounds_on_small_families():
    rng = random.Random(4)
    graphs = [clique(n) for n in (1, 5, 12)] + [path(n) for n in (2, 9, 18)]
    graphs += [brute.random_graph(rng, rng.randint(1, 18), rng.choice([0.2, 0.5])) for _ in range(20)]
    for G in graphs:
        for k in (1, 2, 3):
            check_reed(G, k, reed(G, k))


def _binary_tree(n):
    return Graph(range(n), [(i, (i - 1) // 2) for i in range(1, n)])


@pytest.mark.slow
def test_reed_bounds_on_larger_graphs():
    rng = random.Random(5)
    barbell = Graph(range(121), [e for e in combinations(range(121), 2) if max(e) <= 60 or min(e) >= 60])
    cycle = Graph(range(150), [(i, (i + 1) % 150) for i in range(150)])
    outcomes = {}
    for name, G in [("barbell", barbell), ("tree", _binary_tree(127)), ("cycle", cycle),
                    ("path", path(250)), ("dense", brute.random_graph(rng, 150, 0.5))]:
        out = reed(G, 1)
        outcomes[name] = out.is_separation
        check_reed(G, 1, out)
    # both outcomes show up
    assert set(outcomes.values()) == {True, False}


def test_count_carvable_examples():
    # x=0, a=1, b=2, c=3
    G = Graph(range(4), [(0, 1), (1, 2), (1, 3)])
    assert count_carvable(G, {0}, 2, 3) == 3
    assert count_carvable(G, {0}, 2, 5) == 0
    assert count_carvable(G, {0}, 1, 1) == 0


def test_chip_counts_match_enumeration():
    rng = random.Random(8)
    for _ in range(100):
        n = rng.randint(1, 9)
        G = brute.random_graph(rng, n, rng.choice([0.2, 0.4]))
        X = rng.sample(range(n), rng.randint(0, min(3, n)))
        k, alpha = rng.randint(1, 3), rng.randint(1, 4)
        assert count_carvable(G, X, k, alpha) == len(brute.carvable(G, X, k, alpha))
        assert largest_chip(G, X, k, alpha) == brute.balance(G, X, k, alpha)


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_separating_never_raises_the_balance(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 8)
    G = brute.random_graph(rng, n, rng.choice([0.25, 0.45]))
    X = frozenset(rng.sample(range(n), rng.randint(0, min(3, n))))
    k, alpha = rng.randint(1, 3), rng.randint(1, 3)
    parent = brute.balance(G, X, k, alpha)
    seps = list(brute.separations(G, 2))
    for sep in rng.sample(seps, min(10, len(seps))):
        child_roots = (X & sep.A) | (sep.A & sep.B)
        assert brute.balance(G.subgraph(sep.A), child_roots, k, alpha) <= parent


def test_existence_examples():
    empty = Graph(range(4))
    assert isinstance(folio_or_clique_existence(empty, [], 0, 2), ModelFolio)
    assert folio_or_clique_existence(clique(5), [], 0, 3) == CliqueFlag(3)
    with pytest.raises(GraphError):
        folio_or_clique_existence(empty, [9], 0, 2)


def test_existence_replaces_pendant_chips(monkeypatch):
    calls = []
    real = solver.replace_chips

    def counting(*args, **kwargs):
        H, mapper = real(*args, **kwargs)
        calls.append(len(mapper.steps))
        return H, mapper

    monkeypatch.setattr(solver, "replace_chips", counting)
    G = core_with_pendant_paths(5)
    got = folio_or_clique_existence(G, {0}, 1, 40, SolverConfig(alpha=4))
    assert any(calls)
    assert got.members == brute_folio(G, {0}, 1).members
    assert all_witnesses_valid(G, got)


def test_existence_matches_oracle_on_random_graphs():
    rng = random.Random(12)
    for _ in range(40):
        n = rng.randint(1, 8)
        G = brute.random_graph(rng, n, rng.choice([0.2, 0.5]))
        X = rng.sample(range(n), rng.randint(0, min(2, n)))
        h = rng.randint(3, 4)
        got = folio_or_clique_existence(G, X, 0, h, FORCING)
        truth = brute_folio(G, X, max(h, 0) if h <= n else 0)
        if unrooted_clique(h) in truth:
            assert got == CliqueFlag(h)
        else:
            assert got.members == truth.members
            assert all_witnesses_valid(G, got)


def test_folio_or_clique_examples():
    K3 = clique(3)
    model = folio_or_clique(K3, [], 0, 3)
    assert model == {1: {0}, 2: {1}, 3: {2}}
    C5 = Graph(range(5), [(i, (i + 1) % 5) for i in range(5)])
    res = folio_or_clique(C5, [0], 1, 4)
    assert isinstance(res, ModelFolio)
    assert res.members == brute_folio(C5, [0], 1).members


def test_binary_search_invariant():
    rng = random.Random(13)
    checked = 0
    while checked < 15:
        n = rng.randint(3, 7)
        G = brute.random_graph(rng, n, 0.6)
        h = rng.randint(3, min(n, 4))
        res = clique_search(G, [], 0, h)
        if res.model is None:
            continue
        a = res.index
        assert isinstance(folio_or_clique_existence(edge_prefix(G, a), [], 0, h), ModelFolio)
        assert folio_or_clique_existence(edge_prefix(G, a + 1), [], 0, h) == CliqueFlag(h)
        assert validate_model(G, (), unrooted_clique(h), res.model)
        m = G.number_of_edges()
        # the first probe is G itself and the last re-reads phi(a)
        assert len(res.probes) - 2 <= ceil(log2(m))
        checked += 1


def test_group_branch_sets():
    M = {i + 1: frozenset({i}) for i in range(6)}
    grouped = group_branch_sets(M, 3)
    assert validate_model(clique(6), (), unrooted_clique(3), grouped)
    assert all(len(b) >= 2 for b in grouped.values())
    assert group_branch_sets(M, 6) == M
    assert group_branch_sets(M, 1) == {1: frozenset(range(6))}
    with pytest.raises(PreconditionError):
        group_branch_sets(M, 7)


def test_generic_extract_on_k9():
    K9 = clique(9)
    M = {i + 1: frozenset({i + 2}) for i in range(7)}
    mf = generic_extract(K9, {0, 1}, 1, M)
    assert is_generic(mf)
    assert all_witnesses_valid(K9, mf)
    assert mf.members == brute_folio(K9, {0, 1}, 1).members


def test_generic_extract_trivial_case():
    mf = generic_extract(clique(2), [], 0, {1: frozenset({0})})
    assert mf.members == {EMPTY_PATTERN}


def test_generic_extract_reports_separable_branch_set():
    # roots 0 and 1 reach the K6 on 2..7 only through vertex 2
    G = clique(8)
    for v in range(3, 8):
        G.remove_edge(0, v)
        G.remove_edge(1, v)
    M = {i + 1: frozenset({i + 2}) for i in range(6)}
    with pytest.raises(PreconditionError) as err:
        generic_extract(G, {0, 1}, 0, M)
    sep = err.value.witness
    assert is_separation(G, sep) and sep.order < 2
    assert {0, 1} <= sep.A
    assert any(not (M[u] & sep.A) for u in M)


def test_generic_extract_needs_enough_branch_sets():
    M = {i + 1: frozenset({i + 2}) for i in range(5)}
    with pytest.raises(PreconditionError):
        generic_extract(clique(9), {0, 1}, 0, M)


def test_solve_folio_examples():
    assert solve_folio(Graph(), [], 0).members == {EMPTY_PATTERN}
    with pytest.raises(GraphError):
        solve_folio(Graph(range(2)), [0], -1)


def test_solve_folio_on_chip_heavy_graphs():
    rng = random.Random(14)
    for _ in range(6):
        G, X, k, delta, alpha, _ = crafted.chip_instance(rng)
        cfg = SolverConfig(alpha=alpha, size_budget=3)
        mf = solve_folio(G, X, delta, cfg)
        assert mf.members == brute_folio(G, X, delta).members
        assert all_witnesses_valid(G, mf)


@pytest.mark.parametrize("cfg", [SolverConfig(), FORCING], ids=["default", "forcing"])
def test_solve_folio_matches_oracle(cfg):
    rng = random.Random(15)
    for _ in range(25):
        n = rng.randint(1, 8)
        G = brute.random_graph(rng, n, rng.choice([0.2, 0.5]))
        X = rng.sample(range(n), rng.randint(0, min(3, n)))
        delta = rng.randint(0, 2)
        mf = solve_folio(G, X, delta, cfg)
        assert mf.members == brute_folio(G, X, delta).members
        assert all_witnesses_valid(G, mf)


def is_path(G, p, s, t):
    return p[0] == s and p[-1] == t and len(set(p)) == len(p) and all(G.has_edge(a, b) for a, b in zip(p, p[1:]))


def test_disjoint_paths_examples():
    two = Graph(range(6), [(0, 1), (1, 2), (3, 4), (4, 5)])
    got = disjoint_paths(two, [(0, 2), (3, 5)])
    assert got == [[0, 1, 2], [3, 4, 5]]
    # s1 - s2 - t1 - t2
    assert disjoint_paths(path(4), [(0, 2), (1, 3)]) is None
    K4 = clique(4)
    got = disjoint_paths(K4, [(0, 2), (1, 3)])
    assert got == [[0, 2], [1, 3]]
    assert disjoint_paths(K4, []) == []
    with pytest.raises(GraphError):
        disjoint_paths(K4, [(0, 1), (1, 2)])


def test_disjoint_paths_match_brute_force():
    rng = random.Random(16)
    for _ in range(30):
        n = rng.randint(2, 10)
        G = brute.random_graph(rng, n, rng.choice([0.2, 0.35, 0.5]))
        count = rng.randint(1, min(3, n // 2))
        terms = rng.sample(range(n), 2 * count)
        pairs = list(zip(terms[::2], terms[1::2]))
        expected = brute.disjoint_paths(G, pairs) is not None
        for shortcuts in (True, False):
            got = disjoint_paths(G, pairs, shortcuts=shortcuts)
            assert (got is not None) == expected
            if got is not None:
                assert all(is_path(G, p, s, t) for p, (s, t) in zip(got, pairs))
                used = [v for p in got for v in p]
                assert len(used) == len(set(used))
