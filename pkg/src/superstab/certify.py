"""Super-stability certificates.

A tensegrity with a stress omega is super stable when omega is a strictly
proper equilibrium stress whose Laplacian is PSD with nullity d+1 (d the
affine dimension of p), and the edge directions do not lie on a conic at
infinity.  ``verify_super_stable`` checks all of it and reports a verdict;
``search_stress`` looks for a certifying stress when none is given.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.linalg import null_space

from .multigraph import Multigraph
from .symmat import (DEFAULT_TOL, SpectralSummary, as_sym, as_stress, kernel_representation,
                     psd_nullity, spectrum)
from .tensegrity import (Tensegrity, affine_dimension, equilibrium_residual, properness,
                         stress_scale)


class Verdict(str, Enum):
    SUPER_STABLE = "SuperStable"
    STRESS_ONLY = "StressOnly"
    CONIC_ONLY = "ConicOnly"
    NEITHER = "Neither"
    INDETERMINATE = "Indeterminate"


class IndeterminateError(ArithmeticError):
    """A nullity decision fell inside the tolerance gap."""


class ConicResult(NamedTuple):
    ok: bool
    witness: np.ndarray | None = None


def _sym_basis(d: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(d) for b in range(a, d)]


def conic_system(G: Multigraph, p) -> np.ndarray:
    """Rows ``<S, v v^T>`` as linear functionals of the upper triangle of S,
    one per edge, with ``v = p(j) - p(i)``."""
    P = np.atleast_2d(np.asarray(p, float))
    d = P.shape[0]
    basis = _sym_basis(d)
    A = np.zeros((G.m, len(basis)))
    for k, (i, j) in enumerate(G.edges):
        v = P[:, j] - P[:, i]
        A[k] = [v[a] * v[b] * (1.0 if a == b else 2.0) for a, b in basis]
    return A


def conic_condition(G: Multigraph, p, tol: float = DEFAULT_TOL) -> ConicResult:
    """True iff the only symmetric S with ``v^T S v = 0`` on every edge
    direction is zero.  Vacuous in dimension 0 or without edges."""
    P = np.atleast_2d(np.asarray(p, float))
    d = P.shape[0]
    if d == 0 or G.m == 0 or P.size == 0:
        return ConicResult(True)
    A = conic_system(G, P)
    k = d * (d + 1) // 2
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    smax = s.max(initial=0.0)
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    if rank == k:
        return ConicResult(True)
    x = Vt[-1]
    S = np.zeros((d, d))
    for val, (a, b) in zip(x, _sym_basis(d)):
        S[a, b] = S[b, a] = val
    return ConicResult(False, S)


def affine_coordinates(p, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Coordinates of the points in an orthonormal frame of their affine
    span (a ``d x n`` array with d the affine dimension)."""
    P = np.atleast_2d(np.asarray(p, float))
    d = affine_dimension(P, tol)
    if P.size == 0:
        return np.zeros((0, P.shape[1]))
    C = P - P.mean(axis=1, keepdims=True)
    U, _, _ = np.linalg.svd(C, full_matrices=False)
    return U[:, :d].T @ C


def _check_support(L: np.ndarray, G: Multigraph, tol: float):
    allowed = np.eye(G.n, dtype=bool)
    for i, j in G.edges:
        allowed[i, j] = allowed[j, i] = True
    scale = max(np.abs(L).max(initial=0.0), 1e-300)
    if np.abs(L[~allowed]).max(initial=0.0) > tol * scale:
        raise ValueError("matrix has nonzero entries off the edges of G")


def euclidean_sap(L, G: Multigraph, tol: float = DEFAULT_TOL, scale: float | None = None) -> bool:
    """Euclidean strong Arnold property of a PSD Laplacian, evaluated as the
    conic condition on its reduced kernel representation."""
    L = as_sym(L)
    _check_support(L, G, tol)
    r = psd_nullity(L, tol, scale)
    if not r.determinate:
        raise IndeterminateError("nullity of L is inside the tolerance gap")
    P = kernel_representation(L, tol, reduced=True, scale=scale).P
    return conic_condition(G, P, tol).ok


@dataclass
class Certificate:
    tensegrity: Tensegrity
    omega: np.ndarray
    spectrum: SpectralSummary
    conic: ConicResult
    d: int
    verdict: Verdict
    residual: float = 0.0
    strict: bool = False
    psd: bool = False
    nullity: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def super_stable(self) -> bool:
        return self.verdict is Verdict.SUPER_STABLE

    def report(self) -> dict:
        ev = self.spectrum.eigenvalues
        return {
            "verdict": self.verdict.value,
            "d": self.d,
            "equilibrium_residual": self.residual,
            "strictly_proper": self.strict,
            "psd": self.psd,
            "nullity": self.nullity,
            "min_eigenvalues": ev[: min(len(ev), self.d + 3)].tolist(),
            "conic_ok": self.conic.ok,
            "conic_witness": None if self.conic.witness is None else self.conic.witness.tolist(),
            "omega": self.omega.tolist(),
            "notes": list(self.notes),
        }


def verify_super_stable(T: Tensegrity, omega, tol: float = DEFAULT_TOL) -> Certificate:
    w = as_stress(T.graph, omega)
    d = affine_dimension(T.p, tol)
    notes = []
    res = equilibrium_residual(T, w)
    eq_ok = res <= tol * max(stress_scale(T, w), 1e-300)
    if not eq_ok:
        notes.append(f"equilibrium residual {res:.3e} above tolerance")
    strict = properness(T, w).strict
    if not strict:
        notes.append("stress is not strictly proper for the sign pattern")
    L = T.laplacian(w)
    wscale = float(np.abs(w).max(initial=0.0))
    sp = spectrum(L, tol, wscale or None)
    r = psd_nullity(L, tol, wscale or None)
    conic = conic_condition(T.graph, affine_coordinates(T.p, tol), tol)
    if not conic.ok:
        notes.append("edge directions lie on a conic at infinity")

    if not (eq_ok and strict):
        verdict = Verdict.NEITHER
    elif not r.determinate:
        verdict = Verdict.INDETERMINATE
        notes.append("an eigenvalue of L lies inside the tolerance gap")
    elif r.psd and r.nullity != d + 1:
        verdict = Verdict.NEITHER
        notes.append(f"nullity {r.nullity} does not match affine dimension {d} (expected {d + 1})")
    elif not r.psd:
        notes.append(f"L is not PSD (min eigenvalue {r.min_eig:.3e})")
        verdict = Verdict.CONIC_ONLY if conic.ok else Verdict.NEITHER
    else:
        verdict = Verdict.SUPER_STABLE if conic.ok else Verdict.STRESS_ONLY
    return Certificate(T, w, sp, conic, d, verdict, res, strict, r.psd, r.nullity, notes)


# ------------------------------------------------------------------ search

def equilibrium_matrix(T: Tensegrity) -> np.ndarray:
    """``(d*n) x m`` matrix mapping a stress to the stacked vertex forces."""
    d, n, m = T.dim, T.n, T.graph.m
    A = np.zeros((d * n, m))
    for e, (i, j) in enumerate(T.graph.edges):
        v = T.point(j) - T.point(i)
        A[i * d:(i + 1) * d, e] += v
        A[j * d:(j + 1) * d, e] -= v
    return A


def stress_space(T: Tensegrity, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of the equilibrium stresses."""
    A = equilibrium_matrix(T)
    if A.size == 0 or not np.any(A):
        return np.eye(T.graph.m)
    smax = np.linalg.norm(A, 2)
    return null_space(A, rcond=tol * 10 if smax else None)


def _complement_basis(p: np.ndarray, n: int, tol: float) -> np.ndarray:
    """Orthonormal basis of the complement of span(1, rows of p)."""
    rows = np.vstack([np.ones((1, n)), np.atleast_2d(p)]) if p.size else np.ones((1, n))
    U, s, _ = np.linalg.svd(rows.T, full_matrices=True)
    r = int(np.sum(s > tol * max(s.max(initial=0.0), 1e-300)))
    return U[:, r:]


def search_stress(T: Tensegrity, tol: float = DEFAULT_TOL, budget: int = 4000,
                  seed: int = 0, restarts: int = 8) -> np.ndarray | None:
    """Best-effort search for a super-stability certificate.  Maximizes the
    concave function ``min(lambda_min(Q^T L(Bc) Q), min sigma*(Bc))`` over the
    unit ball, where B spans the equilibrium stresses and Q spans the
    complement of the trivial kernel.  Returns None when nothing is found,
    which proves nothing."""
    G = T.graph
    if G.m == 0:
        return None
    if not conic_condition(G, affine_coordinates(T.p, tol), tol).ok:
        return None
    B = stress_space(T, tol)
    k = B.shape[1]
    if k == 0:
        return None
    Q = _complement_basis(T.p, T.n, tol)
    sigma = np.array(T.sigma, float)
    Lk = np.array([Q.T @ T.laplacian(B[:, j]) @ Q for j in range(k)])
    SB = sigma[:, None] * B  # rows: sign-adjusted stress per edge

    def value(c):
        lam = np.inf
        grad_l = None
        if Q.shape[1]:
            M = np.tensordot(c, Lk, axes=1)
            w, V = np.linalg.eigh(M)
            lam = w[0]
            v = V[:, 0]
            grad_l = np.einsum("i,kij,j->k", v, Lk, v)
        sw = SB @ c
        e = int(np.argmin(sw))
        if sw[e] < lam:
            return float(sw[e]), SB[e]
        return float(lam), grad_l

    def project(c):
        nrm = np.linalg.norm(c)
        return c / nrm if nrm > 1 else c

    rng = np.random.default_rng(seed)
    per = max(budget // max(restarts, 1), 10)
    best_c, best_v = None, -np.inf
    for r in range(restarts):
        c = rng.standard_normal(k)
        if r == 0:
            # warm start: least-squares fit to the sign pattern
            c = np.linalg.lstsq(SB, np.ones(G.m), rcond=None)[0]
        c = project(c / max(np.linalg.norm(c), 1e-300))
        v, g = value(c)
        loc_c, loc_v = c, v
        for t in range(per):
            gn = np.linalg.norm(g)
            if gn == 0:
                break
            c = project(c + 0.5 / np.sqrt(t + 1) * g / gn)
            v, g = value(c)
            if v > loc_v:
                loc_c, loc_v = c, v
        # coordinate ascent polish
        step = 0.05
        while step > 1e-6:
            improved = False
            for j in range(k):
                for sgn in (1.0, -1.0):
                    trial = loc_c.copy()
                    trial[j] += sgn * step
                    trial = project(trial)
                    tv, _ = value(trial)
                    if tv > loc_v:
                        loc_c, loc_v, improved = trial, tv, True
            if not improved:
                step /= 2
        if loc_v > best_v:
            best_c, best_v = loc_c, loc_v
        if best_v > 0:
            w = B @ best_c
            w = w / np.abs(w).max()
            if verify_super_stable(T, w, tol).super_stable:
                return w
    return None
