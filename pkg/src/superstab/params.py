"""Graph parameters: the super stability number lambda, nu = lambda + 1, the
realizable dimension rd, treewidth, clique number and kappa (the largest
vertex connectivity of a minor).

Lower bounds on lambda come from minors with known values; upper bounds from
rd, which is bounded by treewidth and improved by one when an optimal tree
decomposition is "lacking".  ``fold`` turns such a decomposition into an
explicit lower-dimensional deformation of a tensegrity.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterable

import numpy as np

from . import multigraph as mg
from .minors import MinorModel, catalog, contains_any, has_minor
from .multigraph import Multigraph
from .symmat import DEFAULT_TOL
from .tensegrity import Tensegrity, affine_dimension, is_deformation

log = logging.getLogger(__name__)

TREEWIDTH_CAP = 16
CLIQUE_CAP = 20
KAPPA_CAP = 8
LACKING_BUDGET = 10_000


class ParamError(ValueError):
    pass


class FoldError(RuntimeError):
    pass


# ------------------------------------------------------------------ tree decompositions

@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[frozenset, ...]
    tree_edges: tuple[tuple[int, int], ...] = ()

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def to_json(self) -> dict:
        return {"bags": [sorted(b) for b in self.bags], "tree_edges": [list(e) for e in self.tree_edges]}

    @classmethod
    def from_json(cls, data: dict) -> "TreeDecomposition":
        try:
            return cls(tuple(frozenset(int(v) for v in b) for b in data["bags"]),
                       tuple((int(a), int(b)) for a, b in data.get("tree_edges", [])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParamError(f"malformed tree decomposition: {exc}") from exc

    def neighbors(self, i: int) -> list[int]:
        return [b if a == i else a for a, b in self.tree_edges if i in (a, b)]


def validate_td(G: Multigraph, td: TreeDecomposition) -> tuple[bool, list[str]]:
    """Vertex and edge coverage, the subtree property, T being a tree, and no
    bag contained in another."""
    out = []
    k = len(td.bags)
    if k == 0:
        return (G.n == 0, [] if G.n == 0 else ["no bags"])
    for a, b in td.tree_edges:
        if not (0 <= a < k and 0 <= b < k) or a == b:
            out.append(f"tree edge ({a},{b}) is invalid")
    if out:
        return False, out
    # T must be a tree on the bags
    if len(td.tree_edges) != k - 1:
        out.append(f"{len(td.tree_edges)} tree edges for {k} bags")
    T = Multigraph(k, td.tree_edges)
    if len(mg.components(T)) != 1:
        out.append("bag tree is not connected")
    for v in range(G.n):
        holders = [i for i, B in enumerate(td.bags) if v in B]
        if not holders:
            out.append(f"vertex {v} is in no bag")
            continue
        sub = mg.induced_subgraph(T, holders).graph
        if len(mg.components(sub)) != 1:
            out.append(f"bags containing vertex {v} do not form a subtree")
    for B in td.bags:
        if any(not (0 <= v < G.n) for v in B):
            out.append(f"bag {sorted(B)} has unknown vertices")
    for u, v in set(G.edges):
        if not any(u in B and v in B for B in td.bags):
            out.append(f"edge ({u},{v}) is in no bag")
    for i, j in combinations(range(k), 2):
        if td.bags[i] <= td.bags[j] or td.bags[j] <= td.bags[i]:
            out.append(f"bag {i} and bag {j} are nested")
    return not out, out


def _adj_masks(G: Multigraph) -> list[int]:
    masks = [0] * G.n
    for u, v in G.edges:
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return masks


def _q(adj: list[int], S: int, v: int) -> int:
    """Vertices outside S + v reachable from v through S (the bag of v when
    the vertices of S are eliminated first)."""
    comp = 1 << v
    frontier = comp
    while frontier:
        nb = 0
        f = frontier
        while f:
            low = f & -f
            nb |= adj[low.bit_length() - 1]
            f ^= low
        new = nb & S & ~comp
        comp |= new
        frontier = new
    nb = 0
    f = comp
    while f:
        low = f & -f
        nb |= adj[low.bit_length() - 1]
        f ^= low
    return nb & ~comp & ~S


def _elimination_table(G: Multigraph) -> np.ndarray:
    """g[S] = the best width achievable for the vertices outside S once S has
    been eliminated."""
    n = G.n
    adj = _adj_masks(G)
    full = (1 << n) - 1
    g = np.full(1 << n, -1, dtype=np.int16)
    for S in range(full - 1, -1, -1):
        best = n
        rest = full & ~S
        r = rest
        while r:
            low = r & -r
            v = low.bit_length() - 1
            r ^= low
            tail = g[S | low]
            if tail >= best:
                continue
            w = max(bin(_q(adj, S, v)).count("1"), int(tail))
            if w < best:
                best = w
        g[S] = best
    return g


def td_from_ordering(G: Multigraph, order: list[int]) -> TreeDecomposition:
    n = G.n
    if n == 0:
        return TreeDecomposition(())
    adj = _adj_masks(G)
    pos = {v: i for i, v in enumerate(order)}
    S = 0
    bags, parent = [], []
    for v in order:
        Q = _q(adj, S, v)
        later = [u for u in range(n) if Q >> u & 1]
        bags.append(frozenset([v, *later]))
        parent.append(min(later, key=pos.get) if later else None)
        S |= 1 << v
    idx = {v: i for i, v in enumerate(order)}
    edges = []
    roots = []
    for i, p in enumerate(parent):
        if p is None:
            roots.append(i)
        else:
            edges.append((i, idx[p]))
    edges += [(roots[k], roots[k + 1]) for k in range(len(roots) - 1)]
    return _remove_nested(bags, edges)


def _remove_nested(bags: list[frozenset], edges: list[tuple[int, int]]) -> TreeDecomposition:
    """Contract tree edges whose bags are nested until no bag contains a
    neighbour; by the subtree property this removes all nestings."""
    bags = list(bags)
    alive = set(range(len(bags)))
    edges = [tuple(e) for e in edges]
    changed = True
    while changed:
        changed = False
        for k, (a, b) in enumerate(edges):
            if bags[a] <= bags[b] or bags[b] <= bags[a]:
                keep, drop = (b, a) if bags[a] <= bags[b] else (a, b)
                alive.discard(drop)
                edges.pop(k)
                edges = [(keep if x == drop else x, keep if y == drop else y) for x, y in edges]
                changed = True
                break
    order = sorted(alive)
    re = {old: i for i, old in enumerate(order)}
    return TreeDecomposition(tuple(bags[i] for i in order),
                             tuple(sorted((min(re[a], re[b]), max(re[a], re[b])) for a, b in edges)))


def treewidth_exact(G: Multigraph) -> tuple[int, TreeDecomposition]:
    """Exact treewidth by dynamic programming over eliminated vertex sets,
    with an optimal decomposition.  Capped at 16 vertices."""
    if G.n > TREEWIDTH_CAP:
        raise ParamError(f"treewidth_exact is capped at {TREEWIDTH_CAP} vertices (got {G.n})")
    if G.n == 0:
        return -1, TreeDecomposition(())
    g = _elimination_table(G)
    order = next(_optimal_orderings(G, g, 1))
    return int(g[0]), td_from_ordering(G, order)


def _optimal_orderings(G: Multigraph, g: np.ndarray, budget: int):
    """Elimination orderings that attain the optimal width, depth first."""
    n = G.n
    adj = _adj_masks(G)
    tw = int(g[0])
    full = (1 << n) - 1
    count = [0]

    def rec(S, prefix):
        if count[0] >= budget:
            return
        if S == full:
            count[0] += 1
            yield list(prefix)
            return
        for v in range(n):
            if S >> v & 1:
                continue
            T = S | 1 << v
            if g[T] <= tw and bin(_q(adj, S, v)).count("1") <= tw:
                prefix.append(v)
                yield from rec(T, prefix)
                prefix.pop()
                if count[0] >= budget:
                    return

    yield from rec(0, [])


# ------------------------------------------------------------------ lacking

@dataclass
class LackingResult:
    lacking: bool
    non_lacking_bags: list[int]
    pairs: dict[int, tuple[int, int] | None] = field(default_factory=dict)


def _parallel_linked(G: Multigraph, u: int, v: int) -> bool:
    return G.multiplicity().get((min(u, v), max(u, v)), 0) >= 2


def is_lacking(G: Multigraph, td: TreeDecomposition) -> LackingResult:
    """A bag is lacking when it is below the width, or has a pair that is not
    linked by parallel edges and lies in no other bag.  ``pairs`` records such
    a pair per bag (None for the short bags)."""
    ok, errs = validate_td(G, td)
    if not ok:
        raise ParamError("invalid tree decomposition: " + "; ".join(errs))
    mult = G.multiplicity()
    w = td.width
    bad, pairs = [], {}
    for i, B in enumerate(td.bags):
        if len(B) - 1 < w:
            pairs[i] = None
            continue
        found = None
        for u, v in combinations(sorted(B), 2):
            if mult.get((u, v), 0) >= 2:
                continue
            if any(u in C and v in C for j, C in enumerate(td.bags) if j != i):
                continue
            found = (u, v)
            break
        if found is None:
            bad.append(i)
        else:
            pairs[i] = found
    return LackingResult(not bad, bad, pairs)


def find_lacking_td(G: Multigraph, budget: int = LACKING_BUDGET) -> tuple[int, TreeDecomposition | None, int]:
    """Search optimal decompositions (from optimal elimination orderings) for
    a lacking one.  Returns (treewidth, decomposition or None, tried)."""
    if G.n > TREEWIDTH_CAP:
        raise ParamError(f"treewidth search is capped at {TREEWIDTH_CAP} vertices")
    if G.n == 0:
        return -1, None, 0
    g = _elimination_table(G)
    seen = set()
    tried = 0
    for order in _optimal_orderings(G, g, budget):
        tried += 1
        td = td_from_ordering(G, order)
        key = frozenset(td.bags)
        if key in seen:
            continue
        seen.add(key)
        if is_lacking(G, td).lacking:
            return int(g[0]), td, tried
    return int(g[0]), None, tried


# ------------------------------------------------------------------ cliques, kappa

def _simple_adj(G: Multigraph) -> list[set[int]]:
    return G.adjacency()


def clique_number(G: Multigraph) -> int:
    if G.n > CLIQUE_CAP:
        raise ParamError(f"clique_number is capped at {CLIQUE_CAP} vertices")
    adj = _simple_adj(G)
    best = [min(G.n, 1)]

    def expand(R, P):
        if not P:
            best[0] = max(best[0], R)
            return
        if R + len(P) <= best[0]:
            return
        for v in sorted(P, key=lambda x: -len(adj[x] & P)):
            if R + len(P) <= best[0]:
                return
            expand(R + 1, P & adj[v])
            P = P - {v}

    expand(0, set(range(G.n)))
    return best[0]


def vertex_connectivity(adj: list[set[int]]) -> int:
    """Vertex connectivity of a simple graph given by adjacency sets; K_q has
    connectivity q - 1 and a disconnected graph 0."""
    q = len(adj)
    if q <= 1:
        return 0

    def connected(removed):
        rest = [v for v in range(q) if v not in removed]
        seen, stack = {rest[0]}, [rest[0]]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in removed and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return len(seen) == len(rest)

    for k in range(q - 1):
        for X in combinations(range(q), k):
            if not connected(set(X)):
                return k
    return q - 1


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def kappa(G: Multigraph) -> int:
    """Largest vertex connectivity over all minors, by brute force over vertex
    subsets and their partitions into connected branch sets.  n <= 8."""
    if G.n > KAPPA_CAP:
        raise ParamError(f"kappa is capped at {KAPPA_CAP} vertices")
    adj = _simple_adj(G)
    best = 0
    for r in range(1, G.n + 1):
        if r - 1 <= best:
            continue
        for S in combinations(range(G.n), r):
            for part in _set_partitions(list(S)):
                if len(part) - 1 <= best:
                    continue
                owner = {}
                ok = True
                for i, B in enumerate(part):
                    Bs = set(B)
                    if len(B) > 1 and len(mg.components(mg.induced_subgraph(G, B).graph)) != 1:
                        ok = False
                        break
                    for v in Bs:
                        owner[v] = i
                if not ok:
                    continue
                q = [set() for _ in part]
                for v in S:
                    for u in adj[v]:
                        if u in owner and owner[u] != owner[v]:
                            q[owner[v]].add(owner[u])
                best = max(best, vertex_connectivity(q))
    return best


# ------------------------------------------------------------------ bounds

@dataclass
class Bounds:
    lower: int
    upper: int
    exact: bool
    witnesses: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


def _is_forest(G: Multigraph) -> bool:
    return G.m == G.n - len(mg.components(G)) if G.n else True


def _max_complete_minor(G: Multigraph, double: bool):
    """Largest k with K_k (or K_k^= when ``double``) a minor, with its model."""
    build = mg.complete_multi if double else mg.complete
    best = (1 if G.n else 0), None
    for k in range(2, G.n + 1):
        model = has_minor(G, build(k))
        if model is None:
            break
        best = k, model
    return best


def lambda_bounds(G: Multigraph, certify: bool = False, tol: float = DEFAULT_TOL) -> Bounds:
    """Bounds on lambda(G).  With ``certify`` the lower bound is backed by a
    verified certificate grown from the witnessing minor when a gallery entry
    exists for it and G is 2-connected."""
    notes: list[str] = []
    wit: dict[str, Any] = {}
    if G.n == 0:
        return Bounds(0, 0, True, {"reason": "empty graph"})
    forest = _is_forest(G)
    lower, lower_graph, lower_gallery = 0, None, None
    if not forest:
        lower = 1
        if any(c >= 2 for c in G.multiplicity().values()):
            lower_graph, lower_gallery = mg.complete_multi(2), ("complete_multi", 2)
        else:
            lower_graph, lower_gallery = mg.complete(3), ("cycle", 3)
        wit["lower"] = {"minor": "cycle"}
    k, model = _max_complete_minor(G, False)
    if k >= 3 and k - 2 > lower:
        lower, lower_graph, lower_gallery = k - 2, mg.complete(k), ("complete", k)
        wit["lower"] = {"minor": f"K{k}", "model": model}
    kd, model_d = _max_complete_minor(G, True)
    if kd >= 2 and kd - 1 > lower:
        lower, lower_graph, lower_gallery = kd - 1, mg.complete_multi(kd), ("complete_multi", kd)
        wit["lower"] = {"minor": f"K{kd}=", "model": model_d}
    le1 = contains_any(G, catalog("lambda_le_1"))
    cat2 = catalog("lambda_le_2")
    le2 = contains_any(G, cat2) if le1 is not None else None
    if le2 is not None and lower < 3:
        i, m2 = le2
        H = cat2.members[i]
        lower, lower_graph = 3, H
        lower_gallery = {"K5": ("complete", 5), "Q3": ("dihedral_star", None),
                         "K222": ("prism", None), "K4=": ("complete_multi", 4)}.get(cat2.labels[i])
        wit["lower"] = {"minor": cat2.labels[i], "model": m2}

    rd = rd_bounds(G, _lower=lower)
    upper = rd.upper
    wit["upper"] = rd.witnesses.get("upper")
    if forest:
        upper = 0
        wit["upper"] = "forest"
    elif le1 is None:
        upper = min(upper, 1)
        wit["upper"] = "no K4 or K3= minor"
    elif le2 is None and cat2.complete:
        upper = min(upper, 2)
        wit["upper"] = "no member of the lambda <= 2 catalog is a minor"
    if le2 is not None and not cat2.complete:
        notes.append("lambda <= 2 catalog is incomplete; 3 is a sound lower bound only")
    if certify and lower_gallery is not None:
        from .construct import ConstructionError, gallery, realize_from_minor, transport_certificate
        try:
            base = transport_certificate(gallery(*lower_gallery, tol=tol), lower_graph, tol)
            wit["certificate"] = realize_from_minor(G, lower_graph, base, tol=tol)
        except (ConstructionError, mg.GraphError) as exc:
            notes.append(f"lower bound not certified: {exc}")
    elif certify and lower > 0:
        notes.append("no construction route for the lower-bound witness")
    return Bounds(lower, upper, lower == upper, wit, notes + rd.notes)


def rd_bounds(G: Multigraph, budget: int = LACKING_BUDGET, _lower: int | None = None) -> Bounds:
    """Bounds on the realizable dimension.  Upper: treewidth, minus one when a
    lacking optimal decomposition turns up within ``budget`` orderings (only
    for treewidth >= 2: a single strut cannot be folded to a point)."""
    notes = []
    wit: dict[str, Any] = {}
    if G.n == 0:
        return Bounds(0, 0, True)
    if _lower is None:
        _lower = lambda_bounds(G).lower
    lower = max(_lower, 1 if G.m else 0)
    tw, td, tried = find_lacking_td(G, budget)
    upper = tw
    wit["treewidth"] = tw
    if td is not None and tw >= 2:
        upper = tw - 1
        wit["upper"] = {"lacking_td": td}
    else:
        wit["upper"] = {"treewidth": tw}
        if tw >= 2:
            notes.append(f"no lacking optimal decomposition among {tried} orderings")
    if contains_any(G, catalog("lambda_le_1")) is None:
        upper = min(upper, 1 if G.m else 0)
        wit["upper"] = "no K4 or K3= minor"
    ch = chordal_analysis(G)
    if ch is not None:
        lower = upper = ch.rd_exact
        wit["chordal"] = ch
    if lower > upper:
        raise ParamError(f"rd bounds inconsistent: {lower} > {upper}")
    return Bounds(lower, upper, lower == upper, wit, notes)


# ------------------------------------------------------------------ chordal graphs

@dataclass
class ChordalResult:
    tw: int
    rd_exact: int
    lambda_exact: int
    criterion_met: bool
    clique_tree: TreeDecomposition
    maximum_clique: frozenset | None = None


def perfect_elimination_order(G: Multigraph) -> list[int] | None:
    """A perfect elimination ordering of si(G), or None if not chordal.
    Maximum cardinality search, reversed, then checked."""
    adj = _simple_adj(G)
    n = G.n
    weight = [0] * n
    visited = []
    seen = set()
    for _ in range(n):
        v = max((u for u in range(n) if u not in seen), key=lambda u: (weight[u], -u))
        seen.add(v)
        visited.append(v)
        for u in adj[v]:
            if u not in seen:
                weight[u] += 1
    order = visited[::-1]
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [u for u in adj[v] if pos[u] > pos[v]]
        if later:
            nxt = min(later, key=pos.get)
            if not set(later) - {nxt} <= adj[nxt]:
                return None
    return order


def chordal_analysis(G: Multigraph) -> ChordalResult | None:
    order = perfect_elimination_order(G)
    if order is None:
        return None
    adj = _simple_adj(G)
    pos = {v: i for i, v in enumerate(order)}
    cands = [frozenset({v} | {u for u in adj[v] if pos[u] > pos[v]}) for v in order]
    cliques = []
    for C in sorted(set(cands), key=len, reverse=True):
        if not any(C < D for D in cliques):
            cliques.append(C)
    # clique tree: maximum-weight spanning tree of the intersection graph
    k = len(cliques)
    in_tree, edges = {0}, []
    while len(in_tree) < k:
        a, b = max(((a, b) for a in in_tree for b in range(k) if b not in in_tree),
                   key=lambda ab: len(cliques[ab[0]] & cliques[ab[1]]))
        edges.append((min(a, b), max(a, b)))
        in_tree.add(b)
    td = TreeDecomposition(tuple(cliques), tuple(edges))
    omega = max((len(C) for C in cliques), default=0)
    tw = omega - 1
    mult = G.multiplicity()
    criterion, witness = False, None
    for C in cliques:
        if len(C) != omega:
            continue
        if all(mult.get((u, v), 0) >= 2 or any(u in D and v in D for D in cliques if D != C)
               for u, v in combinations(sorted(C), 2)):
            criterion, witness = True, C
            break
    lam = tw if criterion else tw - 1
    lam = max(lam, 0)
    rd = max(lam, 1 if G.m else 0)
    return ChordalResult(tw, rd, lam, criterion, td, witness)


# ------------------------------------------------------------------ folding

def _orth(A: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (columns) of the column span of A."""
    if A.size == 0:
        return np.zeros((A.shape[0], 0))
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > tol * max(s.max(initial=0.0), 1.0)))
    return U[:, :r]


def _complete_basis(U: np.ndarray, D: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(U) in R^D."""
    if U.shape[1] == 0:
        return np.eye(D)
    Q, _ = np.linalg.qr(np.hstack([U, np.eye(D)]))
    return Q[:, U.shape[1]:D]


def _sides(td: TreeDecomposition, i: int, u: int, v: int) -> set[int]:
    """Vertices moved with v when bag i is flattened: v plus everything in the
    branches of T - i whose bags contain v."""
    moved = {v}
    for nb in td.neighbors(i):
        # component of T - i through nb
        comp, stack = {nb}, [nb]
        while stack:
            x = stack.pop()
            for y in td.neighbors(x):
                if y != i and y not in comp:
                    comp.add(y)
                    stack.append(y)
        X = set().union(*(td.bags[j] for j in comp))
        if v in X:
            moved |= X - td.bags[i]
    return moved


def fold(T: Tensegrity, td: TreeDecomposition, tol: float = DEFAULT_TOL) -> np.ndarray:
    """A deformation of T of affine dimension at most width(td) - 1, for a
    lacking decomposition ``td``.

    Phase 1 flattens every bag by rotating the side of its lacking pair (u, v)
    that holds v about the span of the rest of the bag, shrinking |uv| for a
    cable and stretching it for a strut.  Phase 2 roots the tree and rotates
    each subtree about the span of its separator into one common
    (width - 1)-flat.  The result is checked with ``is_deformation``.
    """
    G = T.graph
    lk = is_lacking(G, td)
    if not lk.lacking:
        raise FoldError(f"decomposition is not lacking (bags {lk.non_lacking_bags})")
    d = td.width - 1
    if d < 1:
        raise FoldError("folding needs width at least 2")
    P = np.array(T.p, float)
    if affine_dimension(P, tol) <= d:
        return P
    D = P.shape[0]
    scale = max(np.abs(P).max(), 1.0)
    mult = G.multiplicity()

    # phase 1
    for i, B in enumerate(td.bags):
        idx = sorted(B)
        if affine_dimension(P[:, idx], tol) <= d:
            continue
        u, v = lk.pairs[i]
        axis = [x for x in idx if x not in (u, v)]
        o = P[:, axis[0]]
        Ua = _orth(P[:, axis] - o[:, None], tol)
        a = P[:, u] - o
        a -= Ua @ (Ua.T @ a)
        r = P[:, v] - o
        r -= Ua @ (Ua.T @ r)
        e1 = a / np.linalg.norm(a)
        alpha = r @ e1
        e2 = r - alpha * e1
        beta = np.linalg.norm(e2)
        if beta <= tol * scale:
            continue
        e2 /= beta
        k = mult.get((min(u, v), max(u, v)), 0)
        if k == 1:
            e = next(j for j, ed in enumerate(G.edges) if ed == (min(u, v), max(u, v)))
            target = 0.0 if T.sigma[e] > 0 else np.pi
        else:
            target = 0.0 if alpha >= 0 else np.pi
        phi0 = np.arctan2(beta, alpha)
        theta = target - phi0  # rotate by theta in the (e1, e2) plane
        c, s = np.cos(theta), np.sin(theta)
        moved = sorted(_sides(td, i, u, v))
        X = P[:, moved] - o[:, None]
        x1, x2 = e1 @ X, e2 @ X
        X = X - np.outer(e1, x1) - np.outer(e2, x2)
        X += np.outer(e1, c * x1 - s * x2) + np.outer(e2, s * x1 + c * x2)
        P[:, moved] = X + o[:, None]

    # phase 2
    root = max(range(len(td.bags)), key=lambda j: len(td.bags[j]))
    r_idx = sorted(td.bags[root])
    o = P[:, r_idx[0]].copy()
    UH = _orth(P[:, r_idx] - o[:, None], tol)
    if UH.shape[1] > d:
        raise FoldError("root bag is not flat after phase 1")
    if UH.shape[1] < d:
        UH = np.hstack([UH, _complete_basis(UH, D)[:, : d - UH.shape[1]]])
    parent = {root: None}
    order = [root]
    for x in order:
        for y in td.neighbors(x):
            if y not in parent:
                parent[y] = x
                order.append(y)

    def in_H(idx):
        X = P[:, idx] - o[:, None]
        return np.abs(X - UH @ (UH.T @ X)).max(initial=0.0) <= 1e2 * tol * scale

    for b in order[1:]:
        idx = sorted(td.bags[b])
        if in_H(idx):
            continue
        sep = sorted(td.bags[b] & td.bags[parent[b]])
        sub, stack = {b}, [b]
        while stack:
            x = stack.pop()
            for y in td.neighbors(x):
                if parent.get(y) == x:
                    sub.add(y)
                    stack.append(y)
        verts = sorted(set().union(*(td.bags[j] for j in sub)))
        if sep:
            oS = P[:, sep[0]].copy()
            US = _orth(P[:, sep] - oS[:, None], tol)
        else:
            oS = P[:, idx[0]].copy()
            US = np.zeros((D, 0))
        if US.shape[1] >= d:
            raise FoldError("separator spans the target flat but the bag is outside it")
        # directions of the bag beyond the separator, and of H beyond it
        Bdirs = P[:, idx] - oS[:, None]
        CF = _orth(Bdirs - US @ (US.T @ Bdirs), tol)
        HS = UH - US @ (US.T @ UH)
        CH = _orth(HS, tol)
        CF = np.hstack([CF, _complete_basis(np.hstack([US, CF]), D)])[:, : d - US.shape[1]]
        CH = CH[:, : d - US.shape[1]]
        src = np.hstack([US, CF])
        dst = np.hstack([US, CH])
        Q = np.hstack([dst, _complete_basis(dst, D)]) @ np.hstack([src, _complete_basis(src, D)]).T
        target_origin = oS if sep else o
        P[:, verts] = target_origin[:, None] + Q @ (P[:, verts] - oS[:, None])
    if not in_H(list(range(G.n))):
        raise FoldError("folded configuration left the target flat")
    verdict = is_deformation(T, P, 1e2 * tol * scale)
    if not verdict.ok:
        raise FoldError(f"folded configuration violates {verdict.violations[0].relation} on edge {verdict.violations[0].edge}")
    return P


# ------------------------------------------------------------------ reports

@dataclass
class ParamReport:
    lam: Bounds
    rd: Bounds
    treewidth: int
    clique_number: int
    kappa: int | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def nu(self) -> tuple[int, int]:
        return self.lam.lower + 1, self.lam.upper + 1

    def chain_ok(self) -> bool:
        ok = (self.clique_number - 2 <= self.lam.lower <= self.lam.upper
              <= self.rd.upper <= max(self.treewidth, 0))
        if self.kappa is not None:
            ok = ok and self.clique_number - 2 <= self.kappa - 1 <= self.lam.upper
        return ok

    def to_json(self) -> dict:
        return {
            "lambda": {"lower": self.lam.lower, "upper": self.lam.upper, "exact": self.lam.exact},
            "nu": {"lower": self.nu[0], "upper": self.nu[1]},
            "rd": {"lower": self.rd.lower, "upper": self.rd.upper, "exact": self.rd.exact},
            "treewidth": self.treewidth,
            "clique_number": self.clique_number,
            "kappa": self.kappa,
            "witnesses": {"lambda": _json_witness(self.lam.witnesses), "rd": _json_witness(self.rd.witnesses)},
            "notes": self.notes + self.lam.notes,
        }


def _json_witness(w):
    if isinstance(w, dict):
        return {k: _json_witness(v) for k, v in w.items()}
    if isinstance(w, MinorModel):
        return {"branch_sets": {str(k): sorted(v) for k, v in w.branch_sets.items()},
                "edge_witness": {str(k): v for k, v in w.edge_witness.items()}}
    if isinstance(w, TreeDecomposition):
        return w.to_json()
    if isinstance(w, ChordalResult):
        return {"tw": w.tw, "rd_exact": w.rd_exact, "criterion_met": w.criterion_met,
                "clique_tree": w.clique_tree.to_json()}
    if hasattr(w, "report"):
        return {"verdict": w.verdict.value, "d": w.d}
    return w


def param_report(G: Multigraph, certify: bool = False, with_kappa: bool | None = None) -> ParamReport:
    lam = lambda_bounds(G, certify=certify)
    rd = rd_bounds(G, _lower=lam.lower)
    tw = rd.witnesses.get("treewidth", max(G.n - 1, 0))
    notes = []
    k = None
    if with_kappa is None:
        with_kappa = G.n <= KAPPA_CAP
    if with_kappa:
        k = kappa(G)
    rep = ParamReport(lam, rd, tw, clique_number(G), k, notes)
    if not rep.chain_ok():
        raise ParamError(f"parameter chain violated: {rep.to_json()}")
    return rep


# ------------------------------------------------------------------ conjectures

def conjecture_log(graphs: Iterable[Multigraph]) -> list[dict]:
    """Record, without asserting, whether lambda = rd is consistent with the
    computed bounds, and whether rd(G^=) - 1 <= rd(G) is consistent."""
    rows = []
    for G in graphs:
        lam = lambda_bounds(G)
        rd = rd_bounds(G, _lower=lam.lower)
        rd2 = rd_bounds(mg.double(mg.simplify(G)))
        row = {
            "graph": G.to_json(),
            "lambda": (lam.lower, lam.upper),
            "rd": (rd.lower, rd.upper),
            "lambda_eq_rd_consistent": lam.lower <= rd.upper and rd.lower <= lam.upper,
            "lambda_eq_rd_decided": lam.exact and rd.exact,
            "rd_double_gap_consistent": rd2.lower - 1 <= rd.upper,
        }
        log.info("conjecture check %s", row)
        rows.append(row)
    return rows
