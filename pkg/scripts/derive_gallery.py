"""Derive and freeze the prism and dihedral-star gallery tensegrities.

prism (K_{2,2,2}): two parallel unit equilateral triangles at heights 0 and 1,
the top one rotated by phi.  Triangle edges and verticals b_k t_k are cables,
diagonals b_k t_{k+1} are struts.  We scan phi for a rank drop of the
equilibrium matrix, refine it by minimizing the smallest singular value,
then let search_stress find the certifying stress.

dihedral_star (Q_3): pick a Gram factor Y (8 x 4) with y_i . y_j = 0 on the
non-edges of the cube and sum_i y_i = 0, so L = Y Y^T is a PSD Laplacian
supported on the cube with nullity 4.  The configuration is the reduced
kernel representation of L and signs follow the stress.

Run:  python3 scripts/derive_gallery.py [--out src/superstab/data/gallery.json]
"""
import argparse
import json
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from superstab import multigraph as mg
from superstab.certify import equilibrium_matrix, search_stress, verify_super_stable
from superstab.construct import is_injective
from superstab.symmat import assemble_laplacian, kernel_representation, stress_from_laplacian
from superstab.tensegrity import Tensegrity, non_splittable_sufficient


def prism_tensegrity(phi):
    b = [(np.cos(2 * np.pi * k / 3), np.sin(2 * np.pi * k / 3), 0.0) for k in range(3)]
    t = [(np.cos(2 * np.pi * k / 3 + phi), np.sin(2 * np.pi * k / 3 + phi), 1.0) for k in range(3)]
    p = np.array(b + t).T
    edges, sigma = [], []
    for i, j in ((0, 1), (1, 2), (0, 2)):
        edges += [(i, j), (i + 3, j + 3)]
        sigma += [1, 1]
    for k in range(3):
        edges.append((k, k + 3))
        sigma.append(1)
        edges.append((k, (k + 1) % 3 + 3))
        sigma.append(-1)
    return Tensegrity(mg.Multigraph(6, tuple(edges)), tuple(sigma), p)


def smallest_sv(phi):
    A = equilibrium_matrix(prism_tensegrity(phi))
    return np.linalg.svd(A, compute_uv=False)[-1]


def derive_prism():
    grid = np.linspace(0.01, 2 * np.pi - 0.01, 2000)
    vals = [smallest_sv(x) for x in grid]
    cands = [grid[i] for i in range(1, len(grid) - 1) if vals[i] <= vals[i - 1] and vals[i] <= vals[i + 1]]
    for c in cands:
        phi = minimize_scalar(smallest_sv, bracket=(c - 0.01, c, c + 0.01), tol=1e-14).x
        T = prism_tensegrity(phi)
        w = search_stress(T, seed=0)
        if w is not None:
            return T, w, phi
    raise SystemExit("no twist angle gave a certificate")


def derive_star(seed=0):
    G = mg.cube()
    n = G.n
    adj = G.adjacency()
    non = [(i, j) for i, j in combinations(range(n), 2) if j not in adj[i]]
    rng = np.random.default_rng(seed)
    for _ in range(50):
        def resid(y):
            Y = y.reshape(n, 4)
            r = [Y[i] @ Y[j] for i, j in non]
            r += list(Y.sum(axis=0))
            r.append((Y ** 2).sum() - n)
            return np.array(r)
        sol = least_squares(resid, rng.standard_normal(4 * n), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        Y = sol.x.reshape(n, 4)
        L = Y @ Y.T
        L[np.abs(L) < 1e-13] = 0.0
        w = stress_from_laplacian(G, L)
        if np.abs(w).min() < 1e-3:
            continue
        P = kernel_representation(assemble_laplacian(G, w), reduced=True).P
        T = Tensegrity(G, tuple(np.sign(w).astype(int)), P)
        if verify_super_stable(T, w).super_stable and is_injective(P):
            return T, w
    raise SystemExit("no Gram factor gave a certificate")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/superstab/data/gallery.json"))
    args = ap.parse_args()
    T, w, phi = derive_prism()
    assert non_splittable_sufficient(T)
    print(f"prism: twist {np.degrees(phi):.10f} deg")
    S, ws = derive_star()
    print("dihedral_star: found")
    out = {}
    for name, tt, ww, extra in (("prism", T, w, {"twist_deg": float(np.degrees(phi))}), ("dihedral_star", S, ws, {})):
        entry = tt.to_json()
        entry["omega"] = [float(x) for x in ww]
        entry.update(extra)
        out[name] = entry
    Path(args.out).write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
