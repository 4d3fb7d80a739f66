"""Command-line front end.

Graph files are plain text, 0-based ids, '#' starts a comment line:

    p <n> <m>            optional header; ids must be < n, m edges follow
    <u> <v>              an edge
    roots <id ...>       default root set
    pair <s> <t>         a terminal pair (paths command)
    anchor <u> <id ...>  pattern files only: root set of pattern vertex u

Exit codes: 0 success, 2 bad input, 3 resource guard hit.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .carving import find_chips
from .errors import GraphError, ResourceLimit
from .graph import Graph, RootedGraph, canonicalize
from .oracle import ModelFolio, brute_folio
from .solver import SolverConfig, count_carvable, disjoint_paths, reed, solve_folio

EXIT_INPUT = 2
EXIT_RESOURCE = 3


class ParseError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass
class GraphFile:
    graph: Graph
    roots: Optional[Tuple[int, ...]] = None
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    anchors: Dict[int, Tuple[int, ...]] = field(default_factory=dict)


def _ints(tokens, lineno) -> List[int]:
    out = []
    for t in tokens:
        if not t.isdigit():
            raise ParseError(lineno, f"expected a non-negative integer, got {t!r}")
        out.append(int(t))
    return out


def parse_graph(text: str) -> GraphFile:
    G = Graph()
    declared = None
    header_line = 0
    edge_count = 0
    seen = set()
    gf = GraphFile(G)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, *rest = line.split()
        if head == "p":
            if declared is not None or edge_count:
                raise ParseError(lineno, "header must come first and only once")
            if len(rest) != 2:
                raise ParseError(lineno, "header is 'p <n> <m>'")
            declared = tuple(_ints(rest, lineno))
            header_line = lineno
            for v in range(declared[0]):
                G.add_vertex(v)
            continue
        if head == "roots":
            if gf.roots is not None:
                raise ParseError(lineno, "more than one roots line")
            ids = _ints(rest, lineno)
            if len(set(ids)) != len(ids):
                raise ParseError(lineno, "repeated root")
            gf.roots = tuple(ids)
        elif head == "pair":
            ids = _ints(rest, lineno)
            if len(ids) != 2:
                raise ParseError(lineno, "pair needs exactly two ids")
            gf.pairs.append((ids[0], ids[1]))
        elif head == "anchor":
            ids = _ints(rest, lineno)
            if len(ids) < 2:
                raise ParseError(lineno, "anchor needs a pattern vertex and at least one root")
            if ids[0] in gf.anchors:
                raise ParseError(lineno, f"vertex {ids[0]} anchored twice")
            if declared is not None and ids[0] >= declared[0]:
                raise ParseError(lineno, f"id {ids[0]} is not below n = {declared[0]}")
            gf.anchors[ids[0]] = tuple(ids[1:])
            G.add_vertex(ids[0])
            continue
        else:
            ids = _ints([head] + rest, lineno)
            if len(ids) != 2:
                raise ParseError(lineno, "edge line needs exactly two ids")
            u, v = ids
            if u == v:
                raise ParseError(lineno, f"self-loop at {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ParseError(lineno, f"duplicate edge {key[0]} {key[1]}")
            seen.add(key)
            edge_count += 1
        if declared is not None:
            bad = [x for x in ids if x >= declared[0]]
            if bad:
                raise ParseError(lineno, f"id {bad[0]} is not below n = {declared[0]}")
        if head in ("roots", "pair"):
            for x in ids:
                G.add_vertex(x)
        else:
            G.add_edge(*ids)
    if declared is not None and edge_count != declared[1]:
        raise ParseError(header_line, f"header declares {declared[1]} edges, found {edge_count}")
    return gf


def format_graph(G: Graph, roots: Sequence[int] = (), pairs: Sequence[Tuple[int, int]] = (),
                 comments: Sequence[str] = ()) -> str:
    """Emit G with a header; n is one more than the largest id."""
    n = max(G.vertices) + 1 if len(G) else 0
    lines = [f"# {c}" for c in comments]
    lines.append(f"p {n} {G.number_of_edges()}")
    lines.extend(f"{u} {v}" for u, v in G.edges())
    if roots:
        lines.append("roots " + " ".join(map(str, sorted(roots))))
    lines.extend(f"pair {s} {t}" for s, t in pairs)
    return "\n".join(lines) + "\n"


def read_graph(path: str) -> GraphFile:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise GraphError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_graph(text)


# ---------------------------------------------------------------------------
# result documents


def model_doc(model) -> List[List[int]]:
    return [sorted(model[u]) for u in sorted(model)]


def folio_doc(mf: ModelFolio) -> List[dict]:
    return [{"pattern": p.encode(), "model": model_doc(mf.witness[p])} for p in mf.sorted_members()]


def emit(doc: dict, as_json: bool) -> str:
    if as_json:
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    lines = []
    for key in sorted(doc):
        value = doc[key]
        if key == "folio":
            lines.append(f"members: {len(value)}")
            for m in value:
                sets = " | ".join(",".join(map(str, b)) for b in m["model"])
                lines.append(f"  {m['pattern']}  {sets}")
        elif isinstance(value, dict):
            lines.append(f"{key}:")
            lines.extend(f"  {k}: {json.dumps(v, sort_keys=True)}" for k, v in sorted(value.items()))
        else:
            lines.append(f"{key}: {json.dumps(value, sort_keys=True)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def _config(args) -> SolverConfig:
    return SolverConfig(
        cutoff=args.cutoff,
        size_budget=args.budget,
        alpha=args.alpha,
        density_c=args.density_c,
        splitter=args.splitter,
        seed=args.seed,
        depth_guard=args.depth_guard,
    )


def _roots(args, gf: GraphFile) -> Tuple[int, ...]:
    if args.roots is not None:
        ids = [t for t in args.roots.replace(",", " ").split()]
        if not all(t.isdigit() for t in ids):
            raise GraphError(f"bad --roots value {args.roots!r}")
        roots = tuple(int(t) for t in ids)
    else:
        roots = gf.roots or ()
    missing = sorted(set(roots) - gf.graph.vertices)
    if missing:
        raise GraphError(f"root {missing[0]} is not a vertex")
    return tuple(sorted(set(roots)))


def _config_doc(cfg: SolverConfig) -> dict:
    return asdict(cfg)


def cmd_folio(args) -> dict:
    gf = read_graph(args.path)
    X = _roots(args, gf)
    cfg = _config(args)
    mf = solve_folio(gf.graph, X, args.delta, cfg)
    return {"command": "folio", "verdict": "folio", "roots": list(X), "delta": args.delta,
            "folio": folio_doc(mf), "config": _config_doc(cfg)}


def pattern_from_file(gf: GraphFile) -> RootedGraph:
    roots = {u: gf.anchors.get(u, ()) for u in gf.graph}
    return canonicalize(roots, gf.graph.edges())[0]


def cmd_minor(args) -> dict:
    host = read_graph(args.host)
    pat_file = read_graph(args.pattern)
    pattern = pattern_from_file(pat_file)
    X = frozenset(_roots(args, host)) if (args.roots is not None or host.roots) else pattern.root_union
    if not pattern.root_union <= X:
        raise GraphError("pattern anchors must be roots of the host")
    if not X <= host.graph.vertices:
        raise GraphError("pattern anchors must be host vertices")
    cfg = _config(args)
    mf = solve_folio(host.graph, X, pattern.detail, cfg)
    model = mf.witness.get(pattern)
    doc = {"command": "minor", "pattern": pattern.encode(), "roots": sorted(X),
           "verdict": "present" if model is not None else "absent", "config": _config_doc(cfg)}
    if model is not None:
        doc["model"] = model_doc(model)
    return doc


def cmd_paths(args) -> dict:
    gf = read_graph(args.path)
    if not gf.pairs:
        raise GraphError("no pair lines in the input")
    cfg = _config(args)
    paths = disjoint_paths(gf.graph, gf.pairs, cfg)
    doc = {"command": "paths", "pairs": [list(p) for p in gf.pairs],
           "verdict": "feasible" if paths is not None else "infeasible", "config": _config_doc(cfg)}
    if paths is not None:
        doc["paths"] = paths
    return doc


def cmd_carve(args) -> dict:
    gf = read_graph(args.path)
    X = _roots(args, gf)
    fam = find_chips(gf.graph, X, args.k, args.chip_alpha, args.splitter, args.seed)
    return {"command": "carve", "roots": list(X), "k": args.k, "alpha": args.chip_alpha,
            "chips": [sorted(c) for c in fam.chips], "guaranteed": fam.guaranteed,
            "covered": len(fam.union), "carvable": count_carvable(gf.graph, X, args.k, args.chip_alpha)}


def cmd_reed(args) -> dict:
    gf = read_graph(args.path)
    out = reed(gf.graph, args.k)
    doc = {"command": "reed", "k": args.k, "n": len(gf.graph)}
    if out.is_separation:
        sep = out.separation
        doc.update(verdict="separation", A=sorted(sep.A), B=sorted(sep.B), order=sep.order)
    else:
        doc.update(verdict="wset", wset=sorted(out.wset))
    return doc


def _grid(side: int) -> Graph:
    G = Graph(range(side * side))
    for r in range(side):
        for c in range(side):
            v = r * side + c
            if c + 1 < side:
                G.add_edge(v, v + 1)
            if r + 1 < side:
                G.add_edge(v, v + side)
    return G


def _chipheavy(size: int, rng: random.Random) -> Tuple[Graph, Tuple[int, ...]]:
    """A connected core on ``size`` vertices with roots 0 and 1 and three
    pendant paths of ``size`` vertices each; every path is an
    (X, 2, size)-chip."""
    core = max(size, 2)
    G = Graph(range(core))
    for v in range(1, core):
        G.add_edge(v - 1, v)
    for u in range(core):
        for v in range(u + 2, core):
            if rng.random() < 0.5:
                G.add_edge(u, v)
    nxt = core
    for _ in range(3):
        prev = rng.randrange(core)
        for _ in range(size):
            G.add_edge(prev, nxt)
            prev = nxt
            nxt += 1
    return G, (0, 1)


def generate(kind: str, size: int, seed: int, p: float = 0.5) -> str:
    rng = random.Random(seed)
    if size < 0:
        raise GraphError("size must be non-negative")
    roots: Tuple[int, ...] = ()
    note = [f"gen {kind} size={size} seed={seed}"]
    if kind == "random":
        G = Graph(range(size), [(u, v) for u in range(size) for v in range(u + 1, size) if rng.random() < p])
    elif kind == "grid":
        G = _grid(size)
    elif kind == "clique":
        G = Graph(range(size), [(u, v) for u in range(size) for v in range(u + 1, size)])
    elif kind == "chipheavy":
        G, roots = _chipheavy(size, rng)
        note.append(f"chips for k=2 alpha={size}")
    else:
        raise GraphError(f"unknown generator {kind!r}")
    return format_graph(G, roots, comments=note)


def cmd_gen(args) -> str:
    return generate(args.kind, args.size, args.seed, args.p)


def cmd_bench(args) -> dict:
    """Solve seeded random instances and check each against brute force."""
    cfg = _config(args)
    rng = random.Random(args.seed)
    rows = []
    for i in range(args.count):
        n = rng.randint(1, args.size)
        G = Graph(range(n), [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < args.p])
        X = sorted(rng.sample(range(n), rng.randint(0, min(args.max_roots, n))))
        start = time.perf_counter()
        mf = solve_folio(G, X, args.delta, cfg)
        elapsed = time.perf_counter() - start
        row = {"instance": i, "n": n, "m": G.number_of_edges(), "roots": X, "members": len(mf),
               "agrees": mf.members == brute_folio(G, X, args.delta).members}
        if args.timings:
            row["seconds"] = round(elapsed, 4)
        rows.append(row)
    return {"command": "bench", "delta": args.delta, "rows": rows,
            "verdict": "ok" if all(r["agrees"] for r in rows) else "mismatch", "config": _config_doc(cfg)}


# ---------------------------------------------------------------------------
# argument handling


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cutoff", type=int, default=10, help="brute-force cutoff on |V|")
    p.add_argument("--budget", type=int, default=None, help="preserver size budget")
    p.add_argument("--alpha", type=int, default=None, help="chip size threshold")
    p.add_argument("--density-c", type=float, default=None, dest="density_c",
                   help="enable the edge-density clique shortcut with this constant")
    p.add_argument("--depth-guard", type=int, default=None, dest="depth_guard")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--splitter", choices=["auto", "exhaustive", "complement", "hash"], default="auto")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", help="emit JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minorfolio", description="Rooted minor folios and disjoint paths.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("folio", help="compute the (X, delta)-model-folio")
    p.add_argument("path")
    p.add_argument("--roots", default=None, help="comma or space separated root ids")
    p.add_argument("--delta", type=int, default=0)
    _add_solver_flags(p)
    _add_common(p)

    p = sub.add_parser("minor", help="test for a rooted minor")
    p.add_argument("host")
    p.add_argument("pattern")
    p.add_argument("--roots", default=None)
    _add_solver_flags(p)
    _add_common(p)

    p = sub.add_parser("paths", help="vertex-disjoint paths between the pair lines")
    p.add_argument("path")
    _add_solver_flags(p)
    _add_common(p)

    p = sub.add_parser("carve", help="find pairwise non-touching chips")
    p.add_argument("path")
    p.add_argument("--roots", default=None)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True, dest="chip_alpha")
    _add_common(p)

    p = sub.add_parser("reed", help="balanced separation or well-linked set")
    p.add_argument("path")
    p.add_argument("--k", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("gen", help="print a generated graph file")
    p.add_argument("kind", choices=["random", "grid", "clique", "chipheavy"])
    p.add_argument("--size", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=float, default=0.5, help="edge probability for random graphs")

    p = sub.add_parser("bench", help="solve seeded random instances against brute force")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--size", type=int, default=8, help="largest n")
    p.add_argument("--p", type=float, default=0.4)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--max-roots", type=int, default=2, dest="max_roots")
    p.add_argument("--timings", action="store_true", help="include wall-clock times (not reproducible)")
    _add_solver_flags(p)
    _add_common(p)
    return parser


COMMANDS = {
    "folio": cmd_folio,
    "minor": cmd_minor,
    "paths": cmd_paths,
    "carve": cmd_carve,
    "reed": cmd_reed,
    "bench": cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            sys.stdout.write(cmd_gen(args))
            return 0
        doc = COMMANDS[args.command](args)
    except ResourceLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(emit(doc, args.json))
    return 0


if __name__ == "__main__":
    sys.exit(main())
