"""Dense symmetric-matrix routines: spectra, PSD and nullity decisions under a
relative tolerance, kernel representations, Schur complements and weighted
Laplacians.

All decisions use one relative tolerance ``tol`` multiplied by a scale, which
is the spectral radius of the matrix unless the caller passes a larger one.
An eigenvalue is *zero* if ``|lam| <= tol*scale`` and *nonzero* if
``|lam| > 10*tol*scale``; anything in between makes the decision
indeterminate rather than a guess.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .multigraph import Multigraph

DEFAULT_TOL = 1e-8
GAP_FACTOR = 10.0


class SymmetryError(ValueError):
    pass


class KernelError(ValueError):
    pass


class PivotError(ValueError):
    pass


class StressError(ValueError):
    pass


def as_sym(M, atol: float = 1e-12) -> np.ndarray:
    """Validate near-symmetry (relative to the max entry) and symmetrize."""
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SymmetryError(f"expected a square matrix, got shape {A.shape}")
    norm = np.abs(A).max(initial=0.0)
    if np.abs(A - A.T).max(initial=0.0) > atol * max(norm, 1.0):
        raise SymmetryError("matrix is not symmetric")
    return (A + A.T) / 2


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns, orthonormal
    tol: float
    scale: float

    @property
    def zero_mask(self) -> np.ndarray:
        return np.abs(self.eigenvalues) <= self.tol * self.scale

    @property
    def ambiguous(self) -> np.ndarray:
        a = np.abs(self.eigenvalues)
        return (a > self.tol * self.scale) & (a <= GAP_FACTOR * self.tol * self.scale)

    @property
    def gap_ok(self) -> bool:
        return not self.ambiguous.any()


def spectrum(M, tol: float = DEFAULT_TOL, scale: float | None = None) -> SpectralSummary:
    A = as_sym(M)
    if A.size == 0:
        return SpectralSummary(np.zeros(0), np.zeros((0, 0)), tol, 1.0)
    w, V = np.linalg.eigh(A)
    s = float(np.abs(w).max())
    if scale is not None:
        s = max(s, float(scale))
    if s == 0.0:
        s = 1.0
    return SpectralSummary(w, V, tol, s)


class PsdResult(NamedTuple):
    psd: bool
    nullity: int
    min_eig: float
    determinate: bool = True


def psd_nullity(M, tol: float = DEFAULT_TOL, scale: float | None = None) -> PsdResult:
    """PSD test and numerical nullity.  ``determinate`` is False when some
    eigenvalue falls in the gap band, i.e. neither clearly zero nor clearly
    nonzero."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    sp = spectrum(M, tol, scale)
    if sp.eigenvalues.size == 0:
        return PsdResult(True, 0, 0.0, True)
    lo = float(sp.eigenvalues[0])
    return PsdResult(lo >= -tol * sp.scale, int(sp.zero_mask.sum()), lo, sp.gap_ok)


def inertia(M, tol: float = DEFAULT_TOL, scale: float | None = None) -> tuple[int, int, int]:
    """(n_plus, n_minus, n_zero)."""
    sp = spectrum(M, tol, scale)
    z = sp.zero_mask
    return (int(((sp.eigenvalues > 0) & ~z).sum()),
            int(((sp.eigenvalues < 0) & ~z).sum()), int(z.sum()))


@dataclass(frozen=True)
class KernelRepresentation:
    """Rows of ``P`` span (part of) a kernel.  With ``reduced`` the all-one
    direction has been removed, so ``P`` reads as a centered configuration
    with one point per column."""
    P: np.ndarray
    reduced: bool

    @property
    def dim(self) -> int:
        return self.P.shape[0]


def _orthonormal_rows(B: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    if B.size == 0:
        return B.reshape(0, B.shape[1] if B.ndim == 2 else 0)
    U, s, Vt = np.linalg.svd(B, full_matrices=False)
    keep = s > rtol * max(s.max(initial=0.0), 1e-300)
    return Vt[keep]


def kernel_representation(M, tol: float = DEFAULT_TOL, reduced: bool = False,
                          scale: float | None = None) -> KernelRepresentation:
    sp = spectrum(M, tol, scale)
    n = sp.eigenvalues.size
    K = sp.eigenvectors[:, sp.zero_mask].T
    if not reduced:
        return KernelRepresentation(K.copy(), False)
    one = np.ones(n) / np.sqrt(n) if n else np.zeros(0)
    A = as_sym(M)
    if n and np.linalg.norm(A @ one) > tol * sp.scale:
        raise KernelError("the all-one vector is not in the kernel")
    # project the kernel basis off the all-one direction
    proj = K - np.outer(K @ one, one)
    rows = _orthonormal_rows(proj)
    if rows.shape[0] != K.shape[0] - 1:
        rows = rows[: max(K.shape[0] - 1, 0)]
    return KernelRepresentation(rows, True)


def schur_complement(M, i: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """``T - s s^T / r`` where ``r = M[i,i]``, ``s`` the rest of column i and
    ``T`` the matrix with row and column i removed (other indices keep their
    relative order)."""
    A = as_sym(M)
    n = A.shape[0]
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range")
    r = A[i, i]
    norm = np.abs(A).max(initial=0.0)
    if abs(r) <= tol * max(norm, 1e-300):
        raise PivotError(f"pivot M[{i},{i}] = {r} is numerically zero")
    rest = [k for k in range(n) if k != i]
    s = A[rest, i]
    T = A[np.ix_(rest, rest)]
    return T - np.outer(s, s) / r


def kernel_extend(M, i: int, P_prime, tol: float = DEFAULT_TOL) -> KernelRepresentation:
    """Lift a kernel matrix of ``M/i`` to one of ``M`` by inserting column
    ``p(i) = -(1/r) P' s``."""
    A = as_sym(M)
    n = A.shape[0]
    r = A[i, i]
    norm = np.abs(A).max(initial=0.0)
    if abs(r) <= tol * max(norm, 1e-300):
        raise PivotError(f"pivot M[{i},{i}] = {r} is numerically zero")
    Pp = np.atleast_2d(np.asarray(P_prime, float))
    if Pp.size == 0:
        return KernelRepresentation(np.zeros((0, n)), False)
    if Pp.shape[1] != n - 1:
        raise ValueError(f"P' has {Pp.shape[1]} columns, expected {n - 1}")
    rest = [k for k in range(n) if k != i]
    s = A[rest, i]
    col = -(Pp @ s) / r
    return KernelRepresentation(np.insert(Pp, i, col, axis=1), False)


def as_stress(G: Multigraph, omega) -> np.ndarray:
    """Stress vector indexed by edge id; accepts a sequence of length m or a
    mapping whose keys are exactly the edge ids."""
    if isinstance(omega, Mapping):
        if set(omega) != set(range(G.m)):
            raise StressError("stress keys do not match the edge ids")
        w = np.array([omega[e] for e in range(G.m)], dtype=float)
    else:
        w = np.asarray(omega, dtype=float).reshape(-1)
        if w.size != G.m:
            raise StressError(f"stress has {w.size} entries, graph has {G.m} edges")
    if not np.all(np.isfinite(w)):
        raise StressError("stress has non-finite entries")
    return w


def assemble_laplacian(G: Multigraph, omega) -> np.ndarray:
    """``L = sum_e omega(e) F_e`` with ``F_ij = (e_i - e_j)(e_i - e_j)^T``."""
    w = as_stress(G, omega)
    L = np.zeros((G.n, G.n))
    if G.m:
        E = np.array(G.edges)
        u, v = E[:, 0], E[:, 1]
        np.add.at(L, (u, v), -w)
        np.add.at(L, (v, u), -w)
        np.add.at(L, (u, u), w)
        np.add.at(L, (v, v), w)
    return L


def f_matrix(n: int, i: int, j: int) -> np.ndarray:
    F = np.zeros((n, n))
    F[i, i] = F[j, j] = 1.0
    F[i, j] = F[j, i] = -1.0
    return F


def stress_from_laplacian(G: Multigraph, L) -> np.ndarray:
    """Read a stress off a Laplacian supported on G (simple support only:
    each parallel class gets the off-diagonal weight on its first edge)."""
    L = np.asarray(L, float)
    w = np.zeros(G.m)
    seen = set()
    for k, (i, j) in enumerate(G.edges):
        if (i, j) not in seen:
            w[k] = -L[i, j]
            seen.add((i, j))
    return w
