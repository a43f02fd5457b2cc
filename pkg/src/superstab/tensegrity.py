"""Tensegrities (G, sigma, p): equilibrium, properness, splittability,
deformations and congruence.

The configuration ``p`` is a ``d x n`` array whose column ``i`` is the point
``p(i)``.  Signs are stored as ``+1`` (cable) and ``-1`` (strut) per edge id.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .multigraph import Multigraph
from .symmat import DEFAULT_TOL, as_stress, assemble_laplacian, psd_nullity

MAX_SPLIT_DEGREE = 20


class TensegrityError(ValueError):
    pass


def _sign(s) -> int:
    if s in ("+", 1, 1.0, "cable"):
        return 1
    if s in ("-", -1, -1.0, "strut"):
        return -1
    raise TensegrityError(f"bad sign {s!r}")


@dataclass(frozen=True, eq=False)
class Tensegrity:
    graph: Multigraph
    sigma: tuple[int, ...]
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        sig = tuple(_sign(s) for s in self.sigma)
        if len(sig) != self.graph.m:
            raise TensegrityError(f"{len(sig)} signs for {self.graph.m} edges")
        P = np.array(self.p, dtype=float)
        if P.ndim == 1 and self.graph.n == 0:
            P = P.reshape(0, 0)
        if P.ndim != 2 or P.shape[1] != self.graph.n:
            raise TensegrityError(f"configuration shape {P.shape} does not match n={self.graph.n}")
        if not np.all(np.isfinite(P)):
            raise TensegrityError("configuration has non-finite coordinates")
        P.setflags(write=False)
        object.__setattr__(self, "sigma", sig)
        object.__setattr__(self, "p", P)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def dim(self) -> int:
        """Ambient dimension."""
        return self.p.shape[0]

    def point(self, i: int) -> np.ndarray:
        return self.p[:, i]

    def edge_vectors(self) -> np.ndarray:
        """``p(v) - p(u)`` for every edge ``(u, v)``, as rows."""
        if not self.graph.m:
            return np.zeros((0, self.dim))
        E = np.array(self.graph.edges)
        return (self.p[:, E[:, 1]] - self.p[:, E[:, 0]]).T

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.edge_vectors(), axis=1)

    def with_points(self, q) -> "Tensegrity":
        return Tensegrity(self.graph, self.sigma, q)

    def laplacian(self, omega) -> np.ndarray:
        return assemble_laplacian(self.graph, omega)

    # ------------------------------------------------------------ JSON
    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "sigma": ["+" if s > 0 else "-" for s in self.sigma],
            "points": self.p.T.tolist(),
            "dim": self.dim,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Tensegrity":
        try:
            G = Multigraph.from_json(data["graph"])
            dim = int(data["dim"])
            pts = np.array(data["points"], dtype=float).reshape(G.n, dim)
            return cls(G, tuple(data["sigma"]), pts.T)
        except (KeyError, TypeError, ValueError) as exc:
            raise TensegrityError(f"invalid tensegrity JSON: {exc}") from exc


def load_tensegrity(path) -> Tensegrity:
    return Tensegrity.from_json(json.loads(Path(path).read_text()))


def load_stress(path, G: Multigraph) -> np.ndarray:
    data = json.loads(Path(path).read_text())
    omega = data["omega"] if isinstance(data, dict) else data
    return as_stress(G, omega)


# ------------------------------------------------------------------ geometry

def _coord_scale(p: np.ndarray) -> float:
    return float(np.abs(p).max(initial=0.0))


def affine_dimension(p, tol: float = DEFAULT_TOL) -> int:
    """Dimension of the affine span of the columns of ``p``."""
    P = np.atleast_2d(np.asarray(p, float))
    if P.size == 0:
        return 0
    C = P - P.mean(axis=1, keepdims=True)
    s = np.linalg.svd(C, compute_uv=False)
    scale = max(s.max(initial=0.0), _coord_scale(P))
    if scale == 0.0:
        return 0
    return int(np.sum(s > tol * scale))


def gram(p) -> np.ndarray:
    P = np.atleast_2d(np.asarray(p, float))
    C = P - P.mean(axis=1, keepdims=True)
    return C.T @ C


def is_congruent(p, q, tol: float = DEFAULT_TOL) -> bool:
    Gp, Gq = gram(p), gram(q)
    if Gp.shape != Gq.shape:
        return False
    scale = max(1.0, np.abs(Gp).max(initial=0.0), np.abs(Gq).max(initial=0.0))
    return bool(np.abs(Gp - Gq).max(initial=0.0) <= tol * scale)


# ------------------------------------------------------------------ stresses

def vertex_forces(T: Tensegrity, omega) -> np.ndarray:
    """``d x n`` array of ``sum_j omega(ij) (p(j) - p(i))``."""
    w = as_stress(T.graph, omega)
    F = np.zeros_like(T.p)
    if T.graph.m and T.dim:
        E = np.array(T.graph.edges)
        vec = T.edge_vectors() * w[:, None]  # omega * (p(v) - p(u))
        np.add.at(F.T, E[:, 0], vec)
        np.add.at(F.T, E[:, 1], -vec)
    return F


def equilibrium_residual(T: Tensegrity, omega) -> float:
    F = vertex_forces(T, omega)
    if F.size == 0:
        return 0.0
    return float(np.linalg.norm(F, axis=0).max())


def stress_scale(T: Tensegrity, omega) -> float:
    """Natural size of the forces in ``omega``, for relative tolerances."""
    w = as_stress(T.graph, omega)
    if not w.size:
        return 0.0
    return float(np.max(np.abs(w) * T.edge_lengths(), initial=0.0))


def is_equilibrium(T: Tensegrity, omega, tol: float = DEFAULT_TOL) -> bool:
    scale = max(stress_scale(T, omega), 1e-300)
    return equilibrium_residual(T, omega) <= tol * scale


class Properness(NamedTuple):
    strict: bool
    proper: bool


def properness(T: Tensegrity, omega) -> Properness:
    w = as_stress(T.graph, omega)
    sw = np.array(T.sigma) * w
    return Properness(bool(np.all(sw > 0)), bool(np.all(sw >= 0)))


def splittable_at(T: Tensegrity, omega, v: int, tol: float = DEFAULT_TOL) -> tuple[int, ...] | None:
    """A proper nonempty subset F of the edges at v whose stressed edge
    vectors sum to zero, or None.  Exhaustive over all subsets."""
    w = as_stress(T.graph, omega)
    inc = T.graph.incident(v)
    k = len(inc)
    if k < 2:
        return None
    if k > MAX_SPLIT_DEGREE:
        raise TensegrityError(f"degree {k} exceeds the splittability cap {MAX_SPLIT_DEGREE}")
    terms = np.array([w[e] * (T.point(T.graph.other(e, v)) - T.point(v)) for e in inc])
    if T.dim == 0:
        return (inc[0],)
    mags = np.linalg.norm(terms, axis=1)
    thresh = tol * max(mags.max(initial=0.0), 1e-300)
    if mags.max(initial=0.0) == 0.0:
        return (inc[0],)
    bits = 1 << np.arange(k)
    total = (1 << k) - 1
    chunk = 1 << 14
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total))
        sel = (masks[:, None] & bits) > 0
        sums = sel.astype(float) @ terms
        hit = np.flatnonzero(np.linalg.norm(sums, axis=1) <= thresh)
        if hit.size:
            row = sel[hit[0]]
            return tuple(e for e, s in zip(inc, row) if s)
    return None


def is_splittable(T: Tensegrity, omega, tol: float = DEFAULT_TOL) -> bool:
    return any(splittable_at(T, omega, v, tol) is not None for v in range(T.n))


def non_splittable_sufficient(T: Tensegrity, tol: float = DEFAULT_TOL) -> bool:
    for v in range(T.n):
        nb = sorted(T.graph.neighbors(v) | {v})
        if affine_dimension(T.p[:, nb], tol) < T.graph.degree(v) - 1:
            return False
    return True


def combine_stresses(T: Tensegrity, omega1, omega2, tol: float = DEFAULT_TOL,
                     seed: int = 0, max_tries: int = 28) -> np.ndarray:
    """``C*omega1 + omega2`` for a large random C, verified to keep the
    nullity of ``L(omega1)`` and to be non-splittable."""
    w1 = as_stress(T.graph, omega1)
    w2 = as_stress(T.graph, omega2)
    L1 = T.laplacian(w1)
    target = psd_nullity(L1, tol).nullity
    rng = np.random.default_rng(seed)
    ks = list(range(2, 9))
    for attempt in range(max_tries):
        C = 10.0 ** ks[attempt % len(ks)] * rng.uniform(1, 2)
        w = C * w1 + w2
        r = psd_nullity(T.laplacian(w), tol)
        if r.psd and r.nullity == target and r.determinate and not is_splittable(T, w, tol):
            return w
    raise TensegrityError("no generic constant C verified; inputs may violate the preconditions")


# ------------------------------------------------------------------ deformations

class Violation(NamedTuple):
    edge: int
    relation: str
    length_p: float
    length_q: float


class DeformationVerdict(NamedTuple):
    ok: bool
    violations: list[Violation]


def is_deformation(T: Tensegrity, q, tol: float = DEFAULT_TOL) -> DeformationVerdict:
    """Cables may not get longer and struts may not get shorter."""
    Q = np.atleast_2d(np.asarray(q, float))
    if Q.shape[1] != T.n:
        raise TensegrityError(f"q has {Q.shape[1]} points, expected {T.n}")
    lp = T.edge_lengths()
    lq = Tensegrity(T.graph, T.sigma, Q).edge_lengths()
    out = []
    for e, s in enumerate(T.sigma):
        if s > 0 and lq[e] > lp[e] + tol:
            out.append(Violation(e, "cable: |q| <= |p|", float(lp[e]), float(lq[e])))
        elif s < 0 and lq[e] < lp[e] - tol:
            out.append(Violation(e, "strut: |q| >= |p|", float(lp[e]), float(lq[e])))
    return DeformationVerdict(not out, out)
