"""Regenerate src/superstab/data/catalog_lambda_le_2.json.

The seven forbidden minors for lambda <= 2 are K5 together with every graph
reachable from the cube Q3 by Y-Delta operations.  This script computes that
Y-Delta closure up to isomorphism and writes the catalog file.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

from superstab.multigraph import (canonical_form, complete, complete_multi,
                                  complete_multipartite, cube, is_isomorphic,
                                  y_delta, GraphError)


def y_delta_closure(start):
    found = [start]
    frontier = [start]
    while frontier:
        G = frontier.pop()
        for v in range(G.n):
            try:
                H = y_delta(G, v).graph
            except GraphError:
                continue
            if not any(is_isomorphic(H, F) for F in found):
                found.append(H)
                frontier.append(H)
    return found


def main(out=None):
    family = y_delta_closure(cube())
    family.sort(key=lambda g: (-g.n, canonical_form(g) if g.n <= 7 else ()))
    names = {}
    for g in family:
        if is_isomorphic(g, cube()):
            names[id(g)] = "Q3"
        elif is_isomorphic(g, complete_multipartite(2, 2, 2)):
            names[id(g)] = "K222"
        elif is_isomorphic(g, complete_multi(4)):
            names[id(g)] = "K4="
        else:
            names[id(g)] = f"Q3-YD-{g.n}v"
    members = [complete(5)] + family
    labels = ["K5"] + [names[id(g)] for g in family]
    data = {
        "name": "lambda_le_2",
        "version": 1,
        "semantics": "lambda(G) <= 2 iff no member is a minor",
        "complete": True,
        "labels": labels,
        "members": [g.to_json() for g in members],
    }
    out = Path(out or Path(__file__).resolve().parents[1] / "src/superstab/data/catalog_lambda_le_2.json")
    out.write_text(json.dumps(data, indent=1) + "\n")
    for lab, g in zip(labels, members):
        print(f"{lab:12s} n={g.n} m={g.m}")


if __name__ == "__main__":
    main(*sys.argv[1:])
