"""Constructions of super stable tensegrities.

Gallery realizations for the basic graph families, coning and slicing,
removal of points coincident with a cone vertex, and the operators that grow
a certificate along a graph: adding an edge, subdividing a cable, attaching
an ear and splitting a vertex.  The last two "small perturbation" arguments
are realized numerically by a Gauss-Newton continuation that keeps the
nullity of the stress matrix fixed.

Every public function returns a certificate that has passed
``verify_super_stable``; anything else raises ``ConstructionError``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import multigraph as mg
from .certify import Certificate, Verdict, verify_super_stable
from .minors import data_dir, has_minor
from .multigraph import Multigraph
from .symmat import (DEFAULT_TOL, as_stress, as_sym, assemble_laplacian, f_matrix,
                     kernel_extend, kernel_representation, psd_nullity)
from .tensegrity import Tensegrity, is_splittable

EPS_SCHEDULE = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


class ConstructionError(RuntimeError):
    pass


class ContinuationError(ConstructionError):
    pass


@dataclass
class ConedCertificate:
    certificate: Certificate
    cone_vertex: int


def certify(T: Tensegrity, omega, tol: float = DEFAULT_TOL, what: str = "construction") -> Certificate:
    cert = verify_super_stable(T, omega, tol)
    if cert.verdict is not Verdict.SUPER_STABLE:
        raise ConstructionError(f"{what}: verification gave {cert.verdict.value} ({'; '.join(cert.notes)})")
    return cert


def normalized(cert: Certificate) -> tuple[Tensegrity, np.ndarray]:
    """The certificate's tensegrity and its stress scaled to max |omega| = 1."""
    w = cert.omega
    s = np.abs(w).max(initial=0.0)
    return cert.tensegrity, (w / s if s > 0 else w.copy())


def is_injective(p, tol: float = DEFAULT_TOL) -> bool:
    P = np.atleast_2d(np.asarray(p, float))
    n = P.shape[1]
    if n < 2:
        return True
    if P.shape[0] == 0:
        return False
    D = np.linalg.norm(P[:, :, None] - P[:, None, :], axis=0)
    scale = max(D.max(), 1e-300)
    return bool(D[np.triu_indices(n, 1)].min() > 1e3 * tol * scale)


def distribute(net: float, signs: Sequence[int], pad: float) -> list[float]:
    """Per-edge stresses with the given signs, each strictly proper, summing
    to ``net``.  ``pad`` sets the size of the cancelling part."""
    signs = list(signs)
    pos = [i for i, s in enumerate(signs) if s > 0]
    neg = [i for i, s in enumerate(signs) if s < 0]
    out = [0.0] * len(signs)
    if pos and neg:
        P = max(net, 0.0) + pad
        N = net - P
        for i in pos:
            out[i] = P / len(pos)
        for i in neg:
            out[i] = N / len(neg)
        return out
    idx = pos or neg
    sgn = 1 if pos else -1
    if net * sgn <= 0:
        raise ConstructionError("cannot distribute a stress against a one-signed parallel class")
    for i in idx:
        out[i] = net / len(idx)
    return out


# ------------------------------------------------------------------ gallery

GALLERY_FILE = "gallery.json"


def _tree_cert(G: Multigraph, tol):
    if G.m != G.n - 1 or len(mg.components(G)) != 1:
        raise ConstructionError("tree gallery entry needs a tree")
    T = Tensegrity(G, (1,) * G.m, np.zeros((0, G.n)))
    return certify(T, np.ones(G.m), tol, "gallery tree")


def _cycle_cert(n, tol):
    if n < 2:
        raise ConstructionError("cycle needs n >= 2")
    G = mg.cycle(n)
    w = np.full(n, n - 1.0)
    w[-1] = -1.0
    sigma = (1,) * (n - 1) + (-1,)
    return certify(Tensegrity(G, sigma, np.arange(n, dtype=float)[None, :]), w, tol, "gallery cycle")


def simplex_with_centroid(d: int) -> np.ndarray:
    """d+2 points in R^d in general position: a simplex and its centroid."""
    V = np.hstack([np.zeros((d, 1)), np.eye(d)])
    return np.column_stack([V, V.mean(axis=1)])


def _complete_cert(n, tol):
    if n < 3:
        raise ConstructionError("complete(n) needs n >= 3")
    d = n - 2
    p = simplex_with_centroid(d)
    a = np.append(np.ones(n - 1), -(n - 1.0))  # sum a_v p(v) = 0, sum a_v = 0
    G = mg.complete(n)
    w = np.array([-a[u] * a[v] for u, v in G.edges])  # L = a a^T
    return certify(Tensegrity(G, np.sign(w), p), w, tol, "gallery complete")


def _complete_multi_cert(n, tol):
    if n < 2:
        raise ConstructionError("complete_multi(n) needs n >= 2")
    G = mg.complete_multi(n)
    p = np.hstack([np.zeros((n - 1, 1)), np.eye(n - 1)])
    sig = np.zeros(G.m, int)
    w = np.zeros(G.m)
    for cls in G.parallel_classes():
        a, b = cls.members
        sig[a], sig[b] = 1, -1
        w[a], w[b] = 1.0, -1.0
    return certify(Tensegrity(G, tuple(sig), p), w, tol, "gallery complete_multi")


def _k4_square_cert(tol):
    G = mg.complete(4)
    p = np.array([[0.0, 1, 1, 0], [0, 0, 1, 1]])
    w = np.array([1.0, -1, 1, 1, -1, 1])
    return certify(Tensegrity(G, np.sign(w), p), w, tol, "gallery k4_square")


def _frozen_cert(name, tol):
    path = data_dir() / GALLERY_FILE
    data = json.loads(path.read_text())
    if name not in data:
        raise ConstructionError(f"{name} missing from {path}")
    entry = data[name]
    T = Tensegrity.from_json(entry)
    return certify(T, as_stress(T.graph, entry["omega"]), tol, f"gallery {name}")


GALLERY_NAMES = ("tree", "cycle", "complete", "complete_multi", "prism", "dihedral_star", "k4_square")


def gallery(name: str, n: int | None = None, graph: Multigraph | None = None,
            tol: float = DEFAULT_TOL) -> Certificate:
    """Verified certificates for the basic families.

    ``tree`` takes a tree ``graph`` (default: the path on ``n`` vertices);
    ``cycle``, ``complete`` and ``complete_multi`` take ``n``.
    """
    if name == "tree":
        return _tree_cert(graph if graph is not None else mg.path(n or 2), tol)
    if name == "cycle":
        return _cycle_cert(n, tol)
    if name == "complete":
        return _complete_cert(n, tol)
    if name == "complete_multi":
        return _complete_multi_cert(n, tol)
    if name == "k4_square":
        return _k4_square_cert(tol)
    if name in ("prism", "dihedral_star"):
        return _frozen_cert(name, tol)
    raise ValueError(f"unknown gallery entry {name!r}")


def parse_gallery_name(text: str) -> tuple[str, int | None]:
    """'cycle(5)' -> ('cycle', 5); 'prism' -> ('prism', None)."""
    text = text.strip()
    if "(" in text and text.endswith(")"):
        base, arg = text[:-1].split("(", 1)
        return base.strip(), int(arg)
    return text, None


# ------------------------------------------------------------------ coning

def _cone_frame(cc: ConedCertificate) -> tuple[Tensegrity, np.ndarray]:
    """Tensegrity translated so the cone vertex is at the origin."""
    T = cc.certificate.tensegrity
    p = T.p - T.p[:, [cc.cone_vertex]]
    return T.with_points(p), cc.certificate.omega


def cone_certificate(cert: Certificate, tol: float = DEFAULT_TOL) -> ConedCertificate:
    """Certificate for the cone in one dimension higher: base points get a
    last coordinate 1, the cone vertex sits at the origin, and every cone
    pair carries the cancelling stress (+1, -1), so the stress matrix is
    block-diag(L, 0)."""
    T, w = cert.tensegrity, cert.omega
    G = T.graph
    C, c = mg.cone(G)
    p = np.vstack([T.p, np.ones((1, G.n))])
    p = np.hstack([p, np.zeros((T.dim + 1, 1))])
    sigma = T.sigma + (1, -1) * G.n
    scale = float(np.abs(w).max(initial=1.0)) or 1.0
    w2 = np.concatenate([w, np.tile([scale, -scale], G.n)])
    return ConedCertificate(certify(Tensegrity(C, sigma, p), w2, tol, "cone"), c)


def lift_adjacency(G: Multigraph, A, tol: float = DEFAULT_TOL) -> ConedCertificate:
    """Cone certificate from a PSD matrix A with the sign pattern of G:
    ``L = [[A, -A 1], [-1^T A, 1^T A 1]]`` on the cone of G (cone vertex
    last).  Simple edges need ``A_ij < 0`` and non-edges ``A_ij = 0``;
    parallel classes may carry any value."""
    A = as_sym(A)
    n = G.n
    if A.shape != (n, n):
        raise ConstructionError("A does not match the graph")
    r = psd_nullity(A, tol)
    if not r.psd:
        raise ConstructionError("A is not positive semidefinite")
    C, c = mg.cone(G)
    one = np.ones(n)
    L = np.zeros((n + 1, n + 1))
    L[:n, :n] = A
    L[:n, c] = L[c, :n] = -A @ one
    L[c, c] = one @ A @ one
    pad = max(np.abs(A).max(initial=0.0), 1.0)
    mult = C.multiplicity()
    w = np.zeros(C.m)
    sigma = np.zeros(C.m, int)
    scale = max(np.abs(A).max(initial=0.0), 1e-300)
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in mult and abs(A[i, j]) > tol * scale:
                raise ConstructionError(f"A has a nonzero entry at non-edge ({i},{j})")
    for cls in C.parallel_classes():
        i, j = cls.endpoints
        net = -L[i, j]
        k = len(cls.members)
        if k == 1:
            if net <= tol * scale:
                raise ConstructionError(f"simple edge ({i},{j}) needs a negative entry")
            signs = [1]
        else:
            signs = [1 if t % 2 == 0 else -1 for t in range(k)]
        vals = distribute(net, signs, pad)
        for e, s, v in zip(cls.members, signs, vals):
            sigma[e], w[e] = s, v
    P = kernel_representation(L, tol, reduced=True).P
    if P.shape[0] != r.nullity:
        raise ConstructionError("nullity of the lifted matrix is not nullity(A) + 1")
    T = Tensegrity(C, tuple(sigma), P)
    return ConedCertificate(certify(T, w, tol, "lift_adjacency"), c)


def _cone_edges(G: Multigraph, c: int):
    return [e for e, (a, b) in enumerate(G.edges) if c in (a, b)]


def slide(cc: ConedCertificate, s, tol: float = DEFAULT_TOL) -> ConedCertificate:
    """Move each base point ``v`` to ``s_v p(v)`` along its ray from the cone
    vertex.  The new stress matrix is ``C^T L C`` with ``C[v,v] = 1/s_v`` and
    ``C[v,c] = 1 - 1/s_v``; by Sylvester's law it keeps inertia."""
    T, w = _cone_frame(cc)
    G, c = T.graph, cc.cone_vertex
    n = G.n
    s_full = np.ones(n)
    base = [v for v in range(n) if v != c]
    s_in = np.asarray(s, float).reshape(-1)
    if s_in.size == n:
        s_full = s_in.copy()
        s_full[c] = 1.0
    elif s_in.size == len(base):
        s_full[base] = s_in
    else:
        raise ConstructionError("slide factors must be given per base vertex")
    if np.any(s_full == 0):
        raise ConstructionError("slide factors must be nonzero")
    norms = np.linalg.norm(T.p, axis=0)
    scale = max(norms.max(initial=0.0), 1e-300)
    if np.any(norms[base] <= tol * scale):
        raise ConstructionError("a base point lies at the cone vertex")
    L = T.laplacian(w)
    Cm = np.zeros((n, n))
    for v in base:
        Cm[v, v] = 1.0 / s_full[v]
        Cm[v, c] = 1.0 - 1.0 / s_full[v]
    Cm[c, c] = 1.0
    L2 = Cm.T @ L @ Cm
    q = T.p * s_full[None, :]
    sigma = list(T.sigma)
    w2 = np.zeros(G.m)
    for e, (a, b) in enumerate(G.edges):
        if c not in (a, b):
            w2[e] = w[e] / (s_full[a] * s_full[b])
            sigma[e] = int(np.sign(s_full[a] * s_full[b])) * T.sigma[e]
    pad = float(np.abs(w).max(initial=1.0)) or 1.0
    for cls in G.parallel_classes():
        a, b = cls.endpoints
        if c not in (a, b):
            continue
        signs = [T.sigma[e] for e in cls.members]
        vals = distribute(-L2[a, b], signs, pad)
        for e, v in zip(cls.members, vals):
            w2[e] = v
    T2 = Tensegrity(G, tuple(sigma), q)
    return ConedCertificate(certify(T2, w2, tol, "slide"), c)


def slice_cone(cc: ConedCertificate, normal, offset: float, tol: float = DEFAULT_TOL) -> Certificate:
    """Slide every base point onto the hyperplane ``<normal, x> = offset``
    (coordinates taken with the cone vertex at the origin), drop the cone
    vertex, and certify the base in one dimension lower."""
    T, w = _cone_frame(cc)
    G, c = T.graph, cc.cone_vertex
    nrm = np.asarray(normal, float).reshape(-1)
    if nrm.size != T.dim or not np.any(nrm):
        raise ConstructionError("normal has the wrong size or is zero")
    nrm = nrm / np.linalg.norm(nrm)
    if abs(offset) <= tol:
        raise ConstructionError("hyperplane passes through the cone vertex")
    heights = nrm @ T.p
    base = [v for v in range(G.n) if v != c]
    pscale = max(np.abs(T.p).max(initial=0.0), 1e-300)
    if np.any(np.abs(heights[base]) <= tol * pscale):
        raise ConstructionError("a base ray is parallel to the hyperplane")
    s = np.ones(G.n)
    s[base] = offset / heights[base]
    sl = slide(cc, s[base], tol).certificate
    T2, w2 = sl.tensegrity, sl.omega
    L2 = T2.laplacian(w2)
    net = -L2[c, base]
    if np.abs(net).max(initial=0.0) > 1e3 * tol * max(np.abs(w2).max(), 1e-300):
        raise ConstructionError("net cone stress did not vanish after sliding")
    d = mg.delete_vertex(G, c)
    keep = [e for e in range(G.m) if d.edge_map[e] is not None]
    # coordinates inside the hyperplane
    U = np.linalg.svd(np.eye(T.dim) - np.outer(nrm, nrm))[0][:, : T.dim - 1]
    q = U.T @ T2.p[:, base]
    Tb = Tensegrity(d.graph, tuple(T2.sigma[e] for e in keep), q)
    return certify(Tb, w2[keep], tol, "slice")


def remove_coincident(cc: ConedCertificate, tol: float = DEFAULT_TOL) -> ConedCertificate:
    """Remove base vertices placed at the cone vertex.  Each removal is the
    Schur complement update ``L/v + (1/a)(b + a chi_c)(b + a chi_c)^T``,
    which merges v into the cone vertex."""
    cert, c = cc.certificate, cc.cone_vertex
    T, w = cert.tensegrity, cert.omega
    scale = max(np.abs(T.p).max(initial=0.0), 1e-300)
    while True:
        G = T.graph
        dist = np.linalg.norm(T.p - T.p[:, [c]], axis=0)
        X = [v for v in range(G.n) if v != c and dist[v] <= tol * scale]
        if not X:
            break
        v = X[0]
        L = T.laplacian(w)
        a = L[v, v]
        if a <= tol * max(np.abs(L).max(), 1e-300):
            raise ConstructionError(f"zero pivot at coincident vertex {v}")
        rest = [k for k in range(G.n) if k != v]
        b = L[rest, v]
        chi = np.zeros(len(rest))
        c_new = rest.index(c)
        chi[c_new] = 1.0
        T0 = L[np.ix_(rest, rest)]
        Lv = T0 - np.outer(b, b) / a + np.outer(b + a * chi, b + a * chi) / a
        vmap = {u: i for i, u in enumerate(rest)}
        vmap[v] = c_new
        edges, keep_e = [], []
        for e, (x, y) in enumerate(G.edges):
            if {x, y} == {v, c}:
                continue
            edges.append((vmap[x], vmap[y]))
            keep_e.append(e)
        G2 = Multigraph(G.n - 1, tuple(edges))
        w2 = w[keep_e]
        if not np.allclose(assemble_laplacian(G2, w2), Lv, atol=1e3 * tol * max(np.abs(L).max(), 1.0)):
            raise ConstructionError("Schur update disagrees with the merged Laplacian")
        T = Tensegrity(G2, tuple(T.sigma[e] for e in keep_e), T.p[:, rest])
        w = w2
        c = c_new
    if T is cert.tensegrity:
        return cc
    return ConedCertificate(certify(T, w, tol, "remove_coincident"), c)


# ------------------------------------------------------------------ continuation

@dataclass
class ContinuationProblem:
    """``family(theta, eps)`` is a symmetric matrix; ``dfamily(theta, eps)``
    its derivatives, shape ``(len(theta), n, n)``.  The goal is a theta
    making exactly ``nullity`` eigenvalues zero and the rest positive."""
    family: Callable[[np.ndarray, float], np.ndarray]
    dfamily: Callable[[np.ndarray, float], np.ndarray]
    theta0: np.ndarray
    nullity: int
    eps_schedule: Sequence[float] = EPS_SCHEDULE
    max_iter: int = 100
    tol: float = 1e-12
    verify_tol: float = DEFAULT_TOL
    accept: Callable[[np.ndarray, float, np.ndarray], bool] | None = None

    @property
    def L0(self) -> np.ndarray:
        return self.family(self.theta0, 0.0)


@dataclass
class ContinuationResult:
    theta: np.ndarray
    eps: float
    matrix: np.ndarray
    iterations: int
    log: list[str] = field(default_factory=list)


def _triu(M: np.ndarray) -> np.ndarray:
    return M[np.triu_indices(M.shape[0])]


def _gauss_newton(cp: ContinuationProblem, eps: float):
    k = cp.nullity
    theta = np.array(cp.theta0, float)
    M = cp.family(theta, eps)
    scale = max(np.abs(M).max(), 1e-300)
    w, V = np.linalg.eigh(M)
    r = _triu(V[:, :k].T @ M @ V[:, :k])
    mu = 0.0
    for it in range(cp.max_iter + 1):
        if np.linalg.norm(r) <= cp.tol * scale and w[0] >= -cp.tol * scale:
            return theta, M, it
        if it == cp.max_iter:
            break
        Vk = V[:, :k]
        D = cp.dfamily(theta, eps)
        J = np.array([_triu(Vk.T @ Dj @ Vk) for Dj in D]).T
        accepted = False
        for _ in range(12):
            if mu > 0:
                A = np.vstack([J, np.sqrt(mu) * np.eye(J.shape[1])])
                rhs = np.concatenate([-r, np.zeros(J.shape[1])])
            else:
                A, rhs = J, -r
            step = np.linalg.lstsq(A, rhs, rcond=None)[0]
            th2 = theta + step
            M2 = cp.family(th2, eps)
            w2, V2 = np.linalg.eigh(M2)
            r2 = _triu(V2[:, :k].T @ M2 @ V2[:, :k])
            # the targeted eigenvalues may cross zero on the way (they are the
            # residual); the first untargeted one must stay clearly positive
            gap_ok = k >= len(w2) or w2[k] > 10 * cp.verify_tol * scale
            if np.linalg.norm(r2) < np.linalg.norm(r) and gap_ok:
                theta, M, w, V, r = th2, M2, w2, V2, r2
                mu = mu / 10 if mu > 1e-14 else 0.0
                accepted = True
                break
            mu = max(mu * 10, 1e-10 * max(np.abs(J).max() ** 2, 1e-300))
        if not accepted:
            break
    raise ContinuationError(f"Gauss-Newton stalled at eps={eps:g} (residual {np.linalg.norm(r):.2e})")


def continuation_solve(cp: ContinuationProblem) -> ContinuationResult:
    """Try each eps in the schedule (largest first) and return the first that
    converges to a PSD matrix of the requested nullity."""
    log = []
    for eps in sorted(cp.eps_schedule, reverse=True):
        try:
            theta, M, it = _gauss_newton(cp, eps)
        except ContinuationError as exc:
            log.append(str(exc))
            continue
        r = psd_nullity(M, cp.verify_tol)
        if not (r.psd and r.nullity == cp.nullity and r.determinate):
            log.append(f"eps={eps:g}: converged to nullity {r.nullity}, psd={r.psd}")
            continue
        if cp.accept is not None and not cp.accept(theta, eps, M):
            log.append(f"eps={eps:g}: rejected by acceptance check")
            continue
        return ContinuationResult(theta, eps, M, it, log)
    raise ContinuationError("no eps in the schedule converged: " + " | ".join(log))


def _aligned_kernel(M: np.ndarray, P_old: np.ndarray, k: int) -> np.ndarray:
    """Project the rows of an old configuration onto the k-dimensional
    near-kernel of M; keeps the ambient frame of the old configuration."""
    _, V = np.linalg.eigh(M)
    K = V[:, :k]
    return P_old @ K @ K.T


# ------------------------------------------------------------------ edge operators

def _edge_family(G: Multigraph):
    Fs = np.array([f_matrix(G.n, i, j) for i, j in G.edges]) if G.m else np.zeros((0, G.n, G.n))
    return Fs


def add_edge(cert: Certificate, u: int, v: int, sign: int | None = None,
             eps_schedule: Sequence[float] = EPS_SCHEDULE, tol: float = DEFAULT_TOL) -> Certificate:
    """Certificate for G + uv (new edge id m).  Next to an existing parallel
    edge the stress matrix is reused; otherwise the new edge is a cable and
    the family ``L(theta) + eps F_uv`` is continued."""
    T, w = normalized(cert)
    G = T.graph
    if u == v or not (0 <= u < G.n and 0 <= v < G.n):
        raise ConstructionError(f"invalid edge ({u},{v})")
    G2 = Multigraph(G.n, G.edges + ((u, v),))
    key = G2.edges[-1]
    par = [e for e, ed in enumerate(G.edges) if ed == key]
    if par:
        e0 = par[0]
        s_new = -T.sigma[e0] if sign is None else int(np.sign(sign))
        w2 = np.append(w, 0.0)
        if s_new == T.sigma[e0]:
            w2[e0] = w2[-1] = w[e0] / 2
        else:
            w2[-1] = -w[e0]
            w2[e0] = 2 * w[e0]
        T2 = Tensegrity(G2, T.sigma + (s_new,), T.p)
        return certify(T2, w2, tol, "add_edge (parallel)")
    if sign is not None and sign < 0:
        raise ConstructionError("a new non-parallel edge is added as a cable")
    Fs = _edge_family(G)
    Fe = f_matrix(G.n, u, v)
    k = cert.nullity
    cp = ContinuationProblem(
        family=lambda th, eps: np.tensordot(th, Fs, axes=1) + eps * Fe if G.m else eps * Fe,
        dfamily=lambda th, eps: Fs,
        theta0=w, nullity=k, eps_schedule=eps_schedule, verify_tol=tol,
        accept=lambda th, eps, M: bool(np.all(np.array(T.sigma) * th > 0)))
    res = continuation_solve(cp)
    P = _aligned_kernel(res.matrix, T.p, k)
    T2 = Tensegrity(G2, T.sigma + (1,), P)
    return certify(T2, np.append(res.theta, res.eps), tol, "add_edge")


def subdivide_cable(cert: Certificate, e: int, t: float = 0.5, tol: float = DEFAULT_TOL,
                    avoid_collisions: bool = True) -> Certificate:
    """Replace cable e = uv by u-w-v with w = (1-t) p(u) + t p(v) the new
    vertex n; the two cables carry omega/t and omega/(1-t).  The new edges
    are appended as (u, w), (w, v)."""
    T, w = cert.tensegrity, cert.omega
    G = T.graph
    if not 0 <= e < G.m:
        raise ConstructionError(f"no edge {e}")
    if T.sigma[e] < 0 or w[e] <= 0:
        raise ConstructionError(f"edge {e} is not a cable")
    u, v = G.edges[e]
    pu, pv = T.point(u), T.point(v)
    length = np.linalg.norm(pv - pu)
    scale = max(np.abs(T.p).max(initial=0.0), 1e-300)
    ts = [t]
    if avoid_collisions:
        ts += [1 / 3, 2 / 3, 0.25, 0.75, 0.4, 0.6]
    for tt in ts:
        x = (1 - tt) * pu + tt * pv
        if length <= tol * scale or not avoid_collisions:
            break
        if T.n == 0 or np.linalg.norm(T.p - x[:, None], axis=0).min() > 1e3 * tol * scale:
            break
    else:
        raise ConstructionError("every subdivision point collides with an existing point")
    d = mg.delete_edge(G, e)
    n = G.n
    G2 = Multigraph(n + 1, d.graph.edges + ((u, n), (n, v)))
    sigma = tuple(s for i, s in enumerate(T.sigma) if i != e) + (1, 1)
    w2 = np.concatenate([np.delete(w, e), [w[e] / tt, w[e] / (1 - tt)]])
    P = np.hstack([T.p, x[:, None]])
    return certify(Tensegrity(G2, sigma, P), w2, tol, "subdivide_cable")


def attach_ear(cert: Certificate, a: int, b: int, length: int,
               eps_schedule: Sequence[float] = EPS_SCHEDULE, tol: float = DEFAULT_TOL) -> Certificate:
    """Attach a path a - w1 - ... - b with ``length`` edges; the internal
    vertices get the next free ids in order along the path."""
    n = cert.tensegrity.n
    if not (0 <= a < n and 0 <= b < n) or a == b:
        raise ConstructionError("ear endpoints must be distinct vertices of the graph")
    if length < 1:
        raise ConstructionError("ear length must be positive")
    out = add_edge(cert, a, b, sign=1 if length > 1 else None, eps_schedule=eps_schedule, tol=tol)
    for _ in range(length - 1):
        m = out.tensegrity.graph.m
        # always subdivide the edge at b so the new ids run from a to b
        e = m - 1 if b in out.tensegrity.graph.edges[m - 1] else m - 2
        out = subdivide_cable(out, e, tol=tol)
    return out


# ------------------------------------------------------------------ vertex splitting

def split_vertex_certificate(cert: Certificate, v1: int, move: Sequence[int],
                             eps_schedule: Sequence[float] = EPS_SCHEDULE, injective: bool = False,
                             tol: float = DEFAULT_TOL) -> Certificate:
    """Certificate for the graph where the edges ``move`` at v1 are re-attached
    to a new vertex v0 = n joined to v1 by a new bridge edge (id m).

    The family is the Schur complement at v0 of the split stress matrix,
    ``M(theta, eps) = L(theta) - eps g g^T`` with
    ``g = sum_{f in move} theta_f (e_v1 - e_u)``.  After convergence the
    bridge gets ``1/eps - sum theta_f`` and v0 is placed at
    ``p(v1) + eps sum theta_f (p(u) - p(v1))``.  Here eps is measured
    relative to the largest stress on the moved edges, so the bridge is
    about ``1/eps`` times the local stress rather than the global one.
    """
    T, w = normalized(cert)
    G = T.graph
    n, m, k = G.n, G.m, cert.nullity
    move = list(move)
    inc = set(G.incident(v1))
    if not move or not set(move) <= inc:
        raise ConstructionError("moved edges must be a nonempty set of edges at the split vertex")
    stay = [e for e in inc if e not in move]
    split = mg.vertex_split(G, v1, (stay, move), 1)
    G2 = split.graph
    Fs = _edge_family(G)
    dg = np.zeros((m, n))
    for f in move:
        u = G.other(f, v1)
        dg[f, v1] += 1.0
        dg[f, u] -= 1.0

    rel = 1.0 / np.abs(w[move]).max()

    def family(th, eps):
        eps = eps * rel
        g = th @ dg
        return np.tensordot(th, Fs, axes=1) - eps * np.outer(g, g)

    def dfamily(th, eps):
        eps = eps * rel
        g = th @ dg
        cross = np.einsum("fi,j->fij", dg, g)
        return Fs - eps * (cross + cross.transpose(0, 2, 1))

    sig = np.array(T.sigma)

    def build(th, eps, M):
        P = _aligned_kernel(M, T.p, k)
        beta = 1.0 / (eps * rel) - th[move].sum()
        w2 = np.append(th, beta)
        L2 = assemble_laplacian(G2, w2)
        full = kernel_extend(L2, n, P).P
        sigma = T.sigma + (1 if beta > 0 else -1,)
        return Tensegrity(G2, sigma, full), w2

    def accept(th, eps, M):
        if not np.all(sig * th > 0):
            return False
        T2, w2 = build(th, eps, M)
        c = verify_super_stable(T2, w2, tol)
        if not c.super_stable:
            return False
        if injective:
            return is_injective(T2.p, tol) and not is_splittable(T2, w2, tol)
        return True

    cp = ContinuationProblem(family, dfamily, w, k, eps_schedule, verify_tol=tol, accept=accept)
    try:
        res = continuation_solve(cp)
    except ContinuationError as exc:
        raise ConstructionError(f"split of vertex {v1} failed: {exc}") from exc
    T2, w2 = build(res.theta, res.eps, res.matrix)
    out = certify(T2, w2, tol, "split_vertex")
    out.notes.append(f"split eps={res.eps:g}")
    return out


# ------------------------------------------------------------------ minors

def relabel_certificate(cert: Certificate, G: Multigraph, vperm: Sequence[int],
                        eperm: Sequence[int], tol: float = DEFAULT_TOL) -> Certificate:
    """Re-express a certificate on an isomorphic copy G: current vertex i
    becomes ``vperm[i]`` and current edge j becomes ``eperm[j]``."""
    T, w = cert.tensegrity, cert.omega
    P = np.zeros_like(T.p)
    P[:, list(vperm)] = T.p
    sigma = [0] * G.m
    w2 = np.zeros(G.m)
    for j, e in enumerate(eperm):
        sigma[e] = T.sigma[j]
        w2[e] = w[j]
    for j, (a, b) in enumerate(T.graph.edges):
        if tuple(sorted((vperm[a], vperm[b]))) != G.edges[eperm[j]]:
            raise ConstructionError("relabeling does not map edges onto edges")
    return certify(Tensegrity(G, tuple(sigma), P), w2, tol, "relabel")


def transport_certificate(cert: Certificate, H: Multigraph, tol: float = DEFAULT_TOL) -> Certificate:
    """Move a certificate onto an isomorphic graph H (any vertex labeling)."""
    G = cert.tensegrity.graph
    if G == H:
        return cert
    phi = mg.find_isomorphism(G, H)
    if phi is None:
        raise ConstructionError("graphs are not isomorphic")
    vperm = [phi[v] for v in range(G.n)]
    pool = {}
    for j, e in enumerate(H.edges):
        pool.setdefault(e, []).append(j)
    eperm = [pool[tuple(sorted((vperm[a], vperm[b])))].pop(0) for a, b in G.edges]
    return relabel_certificate(cert, H, vperm, eperm, tol)


def _branch_trees(G: Multigraph, model, witness_edges):
    """Spanning tree (as G-edge ids) of every branch set, pruned of leaves
    that carry no witness edge."""
    touch = {}
    for e in witness_edges:
        for x in G.edges[e]:
            touch[x] = touch.get(x, 0) + 1
    trees = {}
    for x, B in model.branch_sets.items():
        B = set(B)
        root = next(iter(sorted(B)))
        seen, tree, stack = {root}, [], [root]
        while stack:
            a = stack.pop()
            for e in G.incident(a):
                b = G.other(e, a)
                if b in B and b not in seen:
                    seen.add(b)
                    tree.append(e)
                    stack.append(b)
        changed = True
        verts = set(B)
        while changed and len(verts) > 1:
            changed = False
            for y in sorted(verts):
                deg = sum(1 for e in tree if y in G.edges[e])
                if deg <= 1 and not touch.get(y):
                    tree = [e for e in tree if y not in G.edges[e]]
                    verts.discard(y)
                    changed = True
                    break
        trees[x] = (verts, tree)
    return trees


def realize_from_minor(G: Multigraph, H: Multigraph, cert_H: Certificate,
                       eps_schedule: Sequence[float] = EPS_SCHEDULE, injective: bool = True,
                       tol: float = DEFAULT_TOL) -> Certificate:
    """Certificate for G grown from one for its minor H: vertex splits that
    undo the contractions inside each branch set, then ears."""
    if cert_H.tensegrity.graph != H:
        raise ConstructionError("certificate is not for H")
    model = has_minor(G, H)
    if model is None:
        raise ConstructionError("stage minor: H is not a minor of G")
    witness = [model.edge_witness[j] for j in range(H.m)]
    trees = _branch_trees(G, model, witness)
    # current graph = H; label[i] is the G-vertex standing for current vertex i
    label = {}
    roots = {}
    for x, (verts, tree) in trees.items():
        root = min(verts)
        roots[x] = root
        label[x] = root
    cur_edges = list(witness)  # current edge j <-> G-edge
    cert = cert_H
    for x, (verts, tree) in sorted(trees.items()):
        adj = {y: [] for y in verts}
        for e in tree:
            a, b = G.edges[e]
            adj[a].append((b, e))
            adj[b].append((a, e))
        # BFS order from the root; the current representative of a G-vertex is
        # its nearest already-placed ancestor
        parent = {roots[x]: None}
        order = [roots[x]]
        for y in order:
            for z, e in adj[y]:
                if z not in parent:
                    parent[z] = (y, e)
                    order.append(z)
        children = {y: [] for y in order}
        for y in order[1:]:
            children[parent[y][0]].append(y)

        def subtree(b):
            out, stack = set(), [b]
            while stack:
                y = stack.pop()
                out.add(y)
                stack.extend(children[y])
            return out

        inv = {g: i for i, g in label.items()}
        for b in order[1:]:
            a, tree_e = parent[b]
            sub = subtree(b)
            a_id = inv[a]
            Gc = cert.tensegrity.graph
            move = [j for j in Gc.incident(a_id)
                    if any(t in sub for t in G.edges[cur_edges[j]])]
            try:
                cert = split_vertex_certificate(cert, a_id, move, eps_schedule, injective, tol)
            except ConstructionError as exc:
                raise ConstructionError(f"stage split ({a}->{b}): {exc}") from exc
            label[Gc.n] = b
            inv[b] = Gc.n
            cur_edges.append(tree_e)
    sub_edges = list(cur_edges)
    try:
        ears = mg.ear_sequence(G, sub_edges)
    except mg.GraphError as exc:
        raise ConstructionError(f"stage ears: {exc}") from exc
    inv = {g: i for i, g in label.items()}
    for ear in ears:
        a, b = inv[ear.vertices[0]], inv[ear.vertices[-1]]
        n0 = cert.tensegrity.n
        try:
            cert = attach_ear(cert, a, b, ear.length, eps_schedule, tol)
        except ConstructionError as exc:
            raise ConstructionError(f"stage ear {ear.vertices}: {exc}") from exc
        for k, g in enumerate(ear.vertices[1:-1]):
            label[n0 + k] = g
            inv[g] = n0 + k
        by_ends = {tuple(sorted((ear.vertices[k], ear.vertices[k + 1]))): f for k, f in enumerate(ear.edges)}
        Gc = cert.tensegrity.graph
        for j in range(len(cur_edges), Gc.m):
            x, y = Gc.edges[j]
            cur_edges.append(by_ends[tuple(sorted((label[x], label[y])))])
    if len(label) != G.n:
        raise ConstructionError("stage relabel: some vertices of G were never placed")
    vperm = [label[i] for i in range(G.n)]
    out = relabel_certificate(cert, G, vperm, cur_edges, tol)
    if injective and not is_injective(out.tensegrity.p, tol):
        raise ConstructionError("stage final: configuration is not injective")
    return out
