"""Loop-free multigraphs with stable edge ids.

Vertices are ``0..n-1``; an edge id is the index of the edge in ``edges``.
Every operation returns a new graph and never mutates its input.  Operations
that renumber vertices or edges also return the old->new maps, since stresses
and sign functions are stored by edge id.
"""
from __future__ import annotations

import json
from collections import Counter, defaultdict, deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, NamedTuple, Sequence

#: Whether a multigraph on two vertices joined by >= 2 parallel edges counts
#: as 2-connected.  Strictly, k-connected graphs need k+1 vertices.
TWO_VERTEX_PARALLEL_IS_2CONNECTED = True


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Multigraph:
    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise GraphError("negative vertex count")
        norm = []
        for e in self.edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise GraphError(f"loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge {e} out of range for n={self.n}")
            norm.append((u, v) if u < v else (v, u))
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.edges)

    def incident(self, v: int) -> list[int]:
        return [i for i, e in enumerate(self.edges) if v in e]

    def degree(self, v: int) -> int:
        return len(self.incident(v))

    def neighbors(self, v: int) -> set[int]:
        return {u if w == v else w for u, w in self.edges if v in (u, w)}

    def other(self, e: int, v: int) -> int:
        a, b = self.edges[e]
        if v == a:
            return b
        if v == b:
            return a
        raise GraphError(f"vertex {v} is not an end of edge {e}")

    def multiplicity(self) -> Counter:
        return Counter(self.edges)

    def adjacency(self) -> list[set[int]]:
        adj = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def parallel_classes(self) -> list["ParallelClass"]:
        groups = defaultdict(list)
        for i, e in enumerate(self.edges):
            groups[e].append(i)
        return [ParallelClass(k, tuple(v)) for k, v in sorted(groups.items())]

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, data: dict) -> "Multigraph":
        try:
            return cls(int(data["n"]), tuple(tuple(e) for e in data["edges"]))
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph json: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def __repr__(self):
        return f"Multigraph(n={self.n}, edges={list(self.edges)})"


class ParallelClass(NamedTuple):
    endpoints: tuple[int, int]
    members: tuple[int, ...]


class Derived(NamedTuple):
    """A derived graph with vertex and edge maps (old id -> new id or None)."""
    graph: Multigraph
    vertex_map: dict[int, int | None]
    edge_map: dict[int, int | None]


# ---------------------------------------------------------------- builders

def path(n: int) -> Multigraph:
    return Multigraph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle(n: int) -> Multigraph:
    if n < 2:
        raise GraphError("cycle needs n >= 2")
    return Multigraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete(n: int) -> Multigraph:
    return Multigraph(n, tuple(combinations(range(n), 2)))


def complete_multi(n: int) -> Multigraph:
    return double(complete(n))


def complete_multipartite(*sizes: int) -> Multigraph:
    part = [i for i, s in enumerate(sizes) for _ in range(s)]
    n = len(part)
    return Multigraph(n, tuple((u, v) for u, v in combinations(range(n), 2)
                               if part[u] != part[v]))


def cube() -> Multigraph:
    """The 3-cube Q_3; vertex i is the bit string of i."""
    return Multigraph(8, tuple((u, u ^ (1 << b)) for u in range(8)
                               for b in range(3) if u < u ^ (1 << b)))


def petersen() -> Multigraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Multigraph(10, tuple(outer + spokes + inner))


def star(k: int) -> Multigraph:
    return Multigraph(k + 1, tuple((0, i) for i in range(1, k + 1)))


def theta(k: int = 3) -> Multigraph:
    return Multigraph(2, ((0, 1),) * k)


def disjoint_union(*graphs: Multigraph) -> Multigraph:
    edges, off = [], 0
    for g in graphs:
        edges += [(u + off, v + off) for u, v in g.edges]
        off += g.n
    return Multigraph(off, tuple(edges))


# -------------------------------------------------------------- operations

def simplify(G: Multigraph) -> Multigraph:
    """si(G): keep one edge per parallel class."""
    return Multigraph(G.n, tuple(sorted(set(G.edges))))


def double(G: Multigraph) -> Multigraph:
    """G^= = (si(G))^=, every parallel class of size exactly two."""
    return Multigraph(G.n, tuple(e for e in sorted(set(G.edges)) for _ in range(2)))


def _check_edge(G: Multigraph, e: int):
    if not (0 <= e < G.m):
        raise GraphError(f"invalid edge id {e} (graph has {G.m} edges)")


def _check_vertex(G: Multigraph, v: int):
    if not (0 <= v < G.n):
        raise GraphError(f"invalid vertex {v} (graph has {G.n} vertices)")


def delete_edge(G: Multigraph, e: int) -> Derived:
    _check_edge(G, e)
    emap = {i: (i if i < e else i - 1) for i in range(G.m)}
    emap[e] = None
    edges = G.edges[:e] + G.edges[e + 1:]
    return Derived(Multigraph(G.n, edges), {v: v for v in range(G.n)}, emap)


def delete_edges(G: Multigraph, es: Iterable[int]) -> Derived:
    drop = set(es)
    for e in drop:
        _check_edge(G, e)
    emap, edges = {}, []
    for i, e in enumerate(G.edges):
        if i in drop:
            emap[i] = None
        else:
            emap[i] = len(edges)
            edges.append(e)
    return Derived(Multigraph(G.n, tuple(edges)), {v: v for v in range(G.n)}, emap)


def delete_vertex(G: Multigraph, v: int) -> Derived:
    _check_vertex(G, v)
    vmap = {u: (u if u < v else u - 1) for u in range(G.n)}
    vmap[v] = None
    emap, edges = {}, []
    for i, (a, b) in enumerate(G.edges):
        if v in (a, b):
            emap[i] = None
        else:
            emap[i] = len(edges)
            edges.append((vmap[a], vmap[b]))
    return Derived(Multigraph(G.n - 1, tuple(edges)), vmap, emap)


def induced_subgraph(G: Multigraph, keep: Iterable[int]) -> Derived:
    keep = sorted(set(keep))
    vmap = {v: None for v in range(G.n)}
    for i, v in enumerate(keep):
        vmap[v] = i
    emap, edges = {}, []
    for i, (a, b) in enumerate(G.edges):
        if vmap[a] is None or vmap[b] is None:
            emap[i] = None
        else:
            emap[i] = len(edges)
            edges.append((vmap[a], vmap[b]))
    return Derived(Multigraph(len(keep), tuple(edges)), vmap, emap)


def edge_subgraph(G: Multigraph, edge_ids: Iterable[int]) -> Derived:
    """Subgraph formed by the given edges and their endpoints."""
    edge_ids = sorted(set(edge_ids))
    verts = sorted({v for e in edge_ids for v in G.edges[e]})
    vmap = {v: None for v in range(G.n)}
    for i, v in enumerate(verts):
        vmap[v] = i
    emap = {i: None for i in range(G.m)}
    edges = []
    for e in edge_ids:
        a, b = G.edges[e]
        emap[e] = len(edges)
        edges.append((vmap[a], vmap[b]))
    return Derived(Multigraph(len(verts), tuple(edges)), vmap, emap)


def contract_edge(G: Multigraph, e: int) -> Derived:
    """G/e.  The merged vertex keeps the smaller id; parallel partners of e
    become loops and are dropped."""
    _check_edge(G, e)
    keep, gone = G.edges[e]
    vmap = {}
    for v in range(G.n):
        if v == gone:
            vmap[v] = keep
        else:
            vmap[v] = v if v < gone else v - 1
    emap, edges = {}, []
    for i, (a, b) in enumerate(G.edges):
        a2, b2 = vmap[a], vmap[b]
        if a2 == b2:
            emap[i] = None
        else:
            emap[i] = len(edges)
            edges.append((a2, b2))
    return Derived(Multigraph(G.n - 1, tuple(edges)), vmap, emap)


def vertex_split(G: Multigraph, v: int, part: tuple[Iterable[int], Iterable[int]],
                 bridge_count: int = 1) -> Derived:
    """Inverse of contraction.

    ``part = (stay, move)`` partitions the edges at ``v``: ``stay`` edges keep
    ``v``, ``move`` edges are re-attached to the new vertex ``n``.  The
    ``bridge_count`` new edges ``v--n`` are appended after all old edges.
    """
    _check_vertex(G, v)
    if bridge_count < 1:
        raise GraphError("bridge_count must be positive")
    stay, move = set(part[0]), set(part[1])
    inc = set(G.incident(v))
    if stay & move or (stay | move) != inc:
        raise GraphError(f"partition does not split the edges at vertex {v}")
    new = G.n
    edges = []
    for i, (a, b) in enumerate(G.edges):
        if i in move:
            a, b = (new, b) if a == v else (a, new)
        edges.append((a, b))
    edges += [(v, new)] * bridge_count
    return Derived(Multigraph(G.n + 1, tuple(edges)),
                   {u: u for u in range(G.n)}, {i: i for i in range(G.m)})


def cone(G: Multigraph) -> tuple[Multigraph, int]:
    """Cone over G.  The cone vertex is ``n``; original edges keep their ids and
    the pair joining the cone vertex to ``v`` has ids ``m+2v, m+2v+1``."""
    c = G.n
    edges = G.edges + tuple((v, c) for v in range(G.n) for _ in range(2))
    return Multigraph(G.n + 1, edges), c


def y_delta(G: Multigraph, v: int) -> Derived:
    """Replace a degree-3 vertex with three distinct neighbours by a triangle."""
    _check_vertex(G, v)
    inc = G.incident(v)
    if len(inc) != 3:
        raise GraphError(f"vertex {v} has degree {len(inc)}, expected 3")
    nbrs = [G.other(e, v) for e in inc]
    if len(set(nbrs)) != 3:
        raise GraphError(f"vertex {v} has a repeated neighbour")
    d = delete_vertex(G, v)
    a, b, c = (d.vertex_map[u] for u in nbrs)
    H = Multigraph(d.graph.n, d.graph.edges + ((a, b), (b, c), (a, c)))
    return Derived(H, d.vertex_map, d.edge_map)


# ----------------------------------------------------------- connectivity

class Connectivity(NamedTuple):
    components: list[set[int]]
    is_2connected: bool
    cutvertices: set[int]


def components(G: Multigraph) -> list[set[int]]:
    adj = G.adjacency()
    seen, comps = set(), []
    for s in range(G.n):
        if s in seen:
            continue
        comp, queue = {s}, deque([s])
        seen.add(s)
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    comp.add(y)
                    queue.append(y)
        comps.append(comp)
    return comps


def cutvertices(G: Multigraph) -> set[int]:
    adj = G.adjacency()
    disc, low, cuts = {}, {}, set()
    timer = [0]

    def dfs(u, parent):
        disc[u] = low[u] = timer[0]
        timer[0] += 1
        children = 0
        for w in adj[u]:
            if w not in disc:
                children += 1
                dfs(w, u)
                low[u] = min(low[u], low[w])
                if parent is not None and low[w] >= disc[u]:
                    cuts.add(u)
            elif w != parent:
                low[u] = min(low[u], disc[w])
        if parent is None and children > 1:
            cuts.add(u)

    for s in range(G.n):
        if s not in disc:
            dfs(s, None)
    return cuts


def connectivity(G: Multigraph, two_vertex_parallel: bool | None = None) -> Connectivity:
    if two_vertex_parallel is None:
        two_vertex_parallel = TWO_VERTEX_PARALLEL_IS_2CONNECTED
    comps = components(G)
    cuts = cutvertices(G)
    if G.n >= 3:
        two = len(comps) == 1 and not cuts
    elif G.n == 2:
        two = two_vertex_parallel and G.m >= 2
    else:
        two = False
    return Connectivity(comps, two, cuts)


def is_2connected(G: Multigraph) -> bool:
    return connectivity(G).is_2connected


# -------------------------------------------------------------------- ears

class Ear(NamedTuple):
    vertices: tuple[int, ...]
    edges: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.edges)


def ear_sequence(G: Multigraph, sub_edges: Iterable[int]) -> list[Ear]:
    """Open ears that build G from the subgraph spanned by ``sub_edges``.

    Greedy: any unused edge leaving the current subgraph starts an ear, which
    is closed by a BFS through unused vertices avoiding its start.
    """
    sub_edges = set(sub_edges)
    for e in sub_edges:
        _check_edge(G, e)
    H = edge_subgraph(G, sub_edges).graph
    if not connectivity(G).is_2connected or not connectivity(H).is_2connected:
        raise GraphError("ear decomposition needs 2-connected graph and subgraph")
    verts = {v for e in sub_edges for v in G.edges[e]}
    used = set(sub_edges)
    inc = defaultdict(list)
    for i, (a, b) in enumerate(G.edges):
        inc[a].append(i)
        inc[b].append(i)
    ears = []
    while len(used) < G.m:
        start = next(i for i in range(G.m) if i not in used
                     and (G.edges[i][0] in verts or G.edges[i][1] in verts))
        a, b = G.edges[start]
        if a in verts and b in verts:
            ears.append(Ear((a, b), (start,)))
            used.add(start)
            continue
        src = a if a in verts else b
        first = G.other(start, src)
        prev = {first: None}
        queue, end = deque([first]), None
        while queue and end is None:
            x = queue.popleft()
            for f in inc[x]:
                if f in used or f == start:
                    continue
                y = G.other(f, x)
                if y == src or y in prev:
                    continue
                prev[y] = (x, f)
                if y in verts:
                    end = y
                    break
                queue.append(y)
        if end is None:
            raise GraphError("no ear found; graph is not 2-connected")
        vs, es = [end], []
        y = end
        while prev[y] is not None:
            x, f = prev[y]
            es.append(f)
            vs.append(x)
            y = x
        vs.append(src)
        es.append(start)
        vs.reverse()
        es.reverse()
        ears.append(Ear(tuple(vs), tuple(es)))
        used.update(es)
        verts.update(vs)
    return ears


# ------------------------------------------------------------- isomorphism

def _invariant(G: Multigraph):
    mult = G.multiplicity()
    sig = []
    for v in range(G.n):
        sig.append((G.degree(v), tuple(sorted(c for e, c in mult.items() if v in e))))
    return sig


def find_isomorphism(G: Multigraph, H: Multigraph) -> dict[int, int] | None:
    """Vertex bijection G->H preserving edge multiplicities, by backtracking
    with degree pruning.  Desk scale only."""
    if G.n != H.n or G.m != H.m:
        return None
    sg, sh = _invariant(G), _invariant(H)
    if sorted(sg) != sorted(sh):
        return None
    mg, mh = G.multiplicity(), H.multiplicity()

    def cnt(m, a, b):
        return m.get((a, b) if a < b else (b, a), 0)

    order = sorted(range(G.n), key=lambda v: -G.degree(v))
    phi, used = {}, set()

    def rec(k):
        if k == len(order):
            return True
        v = order[k]
        for w in range(H.n):
            if w in used or sh[w] != sg[v]:
                continue
            if all(cnt(mg, v, u) == cnt(mh, w, phi[u]) for u in phi):
                phi[v] = w
                used.add(w)
                if rec(k + 1):
                    return True
                del phi[v]
                used.discard(w)
        return False

    return dict(phi) if rec(0) else None


def is_isomorphic(G: Multigraph, H: Multigraph) -> bool:
    return find_isomorphism(G, H) is not None


def canonical_form(G: Multigraph) -> tuple:
    """Lexicographically least relabelled edge multiset.  Brute force over
    permutations consistent with a degree ordering; intended for n <= 7."""
    from itertools import permutations, product

    key = _invariant(G)
    classes = defaultdict(list)
    for v in range(G.n):
        classes[key[v]].append(v)
    groups = [classes[k] for k in sorted(classes)]
    best = None
    for perms in product(*(permutations(g) for g in groups)):
        relabel, nxt = {}, 0
        for p in perms:
            for v in p:
                relabel[v] = nxt
                nxt += 1
        edges = tuple(sorted(tuple(sorted((relabel[a], relabel[b]))) for a, b in G.edges))
        if best is None or edges < best:
            best = edges
    return (G.n, best or ())


def relabel(G: Multigraph, perm: Sequence[int]) -> Multigraph:
    """Graph with vertex v renamed perm[v]; edge ids unchanged."""
    return Multigraph(G.n, tuple((perm[a], perm[b]) for a, b in G.edges))
