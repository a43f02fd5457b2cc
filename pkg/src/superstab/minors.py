"""Multigraph minor testing with branch-set witnesses, and minor catalogs."""
from __future__ import annotations

import json
import os
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .multigraph import GraphError, Multigraph, complete, complete_multi, components


@dataclass(frozen=True)
class MinorModel:
    """Branch sets ``V_x`` of G for every vertex x of H, plus one distinct G-edge
    for every H-edge (``edge_witness[h_edge] = g_edge``)."""
    branch_sets: dict[int, frozenset[int]]
    edge_witness: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class MinorCatalog:
    name: str
    members: tuple[Multigraph, ...]
    threshold_semantics: str
    complete: bool
    labels: tuple[str, ...] = ()


def _count_between(G_mult: Counter, A, B) -> int:
    return sum(c for (u, v), c in G_mult.items()
               if (u in A and v in B) or (u in B and v in A))


def _connected(adj, S) -> bool:
    S = set(S)
    if not S:
        return False
    start = next(iter(S))
    seen, stack = {start}, [start]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y in S and y not in seen:
                seen.add(y)
                stack.append(y)
    return seen == S


def check_model(G: Multigraph, H: Multigraph, model: MinorModel) -> list[str]:
    """List of violated model invariants (empty when the model is sound)."""
    problems = []
    adj = G.adjacency()
    sets = model.branch_sets
    if set(sets) != set(range(H.n)):
        problems.append("branch sets do not cover V(H)")
        return problems
    seen = set()
    for x, B in sets.items():
        if not B:
            problems.append(f"branch set {x} empty")
        if seen & B:
            problems.append(f"branch set {x} overlaps another")
        seen |= B
        if B and not _connected(adj, B):
            problems.append(f"branch set {x} not connected")
    gm = G.multiplicity()
    for (x, y), k in H.multiplicity().items():
        if _count_between(gm, sets[x], sets[y]) < k:
            problems.append(f"too few edges between branch sets {x},{y}")
    if model.edge_witness:
        used = list(model.edge_witness.values())
        if len(set(used)) != len(used):
            problems.append("edge witness not injective")
        for he, ge in model.edge_witness.items():
            x, y = H.edges[he]
            a, b = G.edges[ge]
            if not ((a in sets[x] and b in sets[y]) or (a in sets[y] and b in sets[x])):
                problems.append(f"edge witness {he}->{ge} does not join its branch sets")
    return problems


def _connected_sets(adj, seed, allowed, cap):
    """Connected subsets of ``allowed`` containing ``seed``, each once, with at
    most ``cap`` vertices; smaller sets tend to come first."""

    def rec(S, cand, excl):
        yield S
        if len(S) >= cap:
            return
        cand = sorted(cand)
        for i, v in enumerate(cand):
            new_excl = excl | set(cand[:i])
            new_S = S | {v}
            new_cand = (set(cand[i + 1:]) | (adj[v] & allowed)) - new_S - new_excl
            yield from rec(new_S, new_cand, new_excl)

    start = frozenset([seed])
    yield from rec(start, (adj[seed] & allowed) - start, frozenset())


def _h_order(H: Multigraph) -> list[int]:
    adj = H.adjacency()
    order, seen = [], set()
    for comp in sorted(components(H), key=len, reverse=True):
        root = max(comp, key=lambda v: (len(adj[v]), -v))
        queue = [root]
        seen.add(root)
        while queue:
            # pick the frontier vertex with most placed neighbours
            queue.sort(key=lambda v: (-len(adj[v] & set(order)), -len(adj[v])))
            x = queue.pop(0)
            order.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    return order


def _edge_witness(G: Multigraph, H: Multigraph, sets) -> dict[int, int]:
    pool = defaultdict(list)
    for i, (a, b) in enumerate(G.edges):
        pool[(a, b)].append(i)
    owner = {v: x for x, B in sets.items() for v in B}
    between = defaultdict(list)
    for i, (a, b) in enumerate(G.edges):
        xa, xb = owner.get(a), owner.get(b)
        if xa is not None and xb is not None and xa != xb:
            between[(min(xa, xb), max(xa, xb))].append(i)
    witness = {}
    for he, (x, y) in enumerate(H.edges):
        witness[he] = between[(x, y)].pop(0)
    return witness


def has_minor(G: Multigraph, H: Multigraph) -> MinorModel | None:
    """A witness model if H is a minor of G (parallel edges of H need at least
    as many G-edges between the corresponding branch sets), else None."""
    if H.n > G.n or H.m > G.m:
        return None
    if H.n == 0:
        return MinorModel({}, {})
    adj = G.adjacency()
    gm = G.multiplicity()
    hm = H.multiplicity()
    hadj = H.adjacency()
    order = _h_order(H)
    need = defaultdict(dict)
    for (x, y), k in hm.items():
        need[x][y] = k
        need[y][x] = k

    sets: dict[int, frozenset] = {}

    def frontier_ok(free):
        for y, By in sets.items():
            want = sum(k for z, k in need[y].items() if z not in sets)
            if want and _count_between(gm, By, free) < want:
                return False
        return True

    def rec(k, free):
        if k == len(order):
            return True
        x = order[k]
        remaining = len(order) - k - 1
        cap = len(free) - remaining
        if cap < 1:
            return False
        placed_nbrs = [y for y in hadj[x] if y in sets]
        if placed_nbrs:
            y0 = min(placed_nbrs, key=lambda y: len(sets[y]))
            seeds = sorted({w for v in sets[y0] for w in adj[v] if w in free})
        else:
            seeds = sorted(free)
        tried = set()
        for s in seeds:
            allowed = free - tried
            for B in _connected_sets(adj, s, allowed, cap):
                if any(_count_between(gm, B, sets[y]) < need[x][y] for y in placed_nbrs):
                    continue
                sets[x] = B
                rest = free - B
                if frontier_ok(rest) and rec(k + 1, rest):
                    return True
                del sets[x]
            tried.add(s)
        return False

    if not rec(0, frozenset(range(G.n))):
        return None
    model_sets = dict(sets)
    return MinorModel(model_sets, _edge_witness(G, H, model_sets))


def minor_replay(G: Multigraph, H: Multigraph, model: MinorModel) -> Multigraph:
    """Contract every branch set and delete everything else; the result has the
    vertices of H (same ids) and all G-edges running between branch sets."""
    owner = {v: x for x, B in model.branch_sets.items() for v in B}
    edges = []
    for a, b in G.edges:
        xa, xb = owner.get(a), owner.get(b)
        if xa is not None and xb is not None and xa != xb:
            edges.append((xa, xb))
    return Multigraph(H.n, tuple(edges))


# ---------------------------------------------------------------- catalogs

def data_dir() -> Path:
    env = os.environ.get("SUPERSTAB_DATA_DIR")
    if env:
        return Path(env)
    return Path(str(resources.files("superstab") / "data"))


def load_catalog_file(path) -> MinorCatalog:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
        members = tuple(Multigraph.from_json(g) for g in data["members"])
        labels = tuple(data.get("labels", [""] * len(members)))
        return MinorCatalog(data["name"], members, data.get("semantics", ""),
                            bool(data["complete"]), labels)
    except FileNotFoundError:
        raise
    except (KeyError, ValueError, TypeError, GraphError) as exc:
        raise ValueError(f"invalid catalog file {path}: {exc}") from exc


def catalog(level: str) -> MinorCatalog:
    if level == "lambda_le_1":
        return MinorCatalog("lambda_le_1", (complete(4), complete_multi(3)),
                            "lambda(G) <= 1 iff no member is a minor", True,
                            ("K4", "K3="))
    if level == "lambda_le_2":
        return load_catalog_file(data_dir() / "catalog_lambda_le_2.json")
    raise ValueError(f"unknown catalog level {level!r}")


def contains_any(G: Multigraph, cat: MinorCatalog) -> tuple[int, MinorModel] | None:
    for i, H in enumerate(cat.members):
        model = has_minor(G, H)
        if model is not None:
            return i, model
    return None
