"""Command-line front end: ``superstab <command> ...``.

Exit codes: 0 success or affirmative verdict, 1 negative verdict, 2
indeterminate, 3 usage or input error.  Reports are JSON (or ``--format
text``) with floats rounded to 12 decimals so identical inputs give identical
bytes.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import multigraph as mg
from .certify import Certificate, Verdict, search_stress, verify_super_stable
from .construct import (ConedCertificate, ConstructionError, add_edge, attach_ear,
                        cone_certificate, gallery, parse_gallery_name, realize_from_minor,
                        slice_cone, split_vertex_certificate, subdivide_cable,
                        transport_certificate)
from .minors import has_minor
from .multigraph import GraphError, Multigraph
from .params import (FoldError, ParamError, TreeDecomposition, find_lacking_td, fold,
                     param_report)
from .symmat import DEFAULT_TOL
from .tensegrity import Tensegrity, TensegrityError, as_stress

OK, NEGATIVE, INDETERMINATE, USAGE = 0, 1, 2, 3
DIGITS = 12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------------ I/O

def clean(obj):
    """JSON-ready copy with numpy types converted and floats rounded."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = round(float(obj), DIGITS)
        return 0.0 if x == 0 else x
    if isinstance(obj, (frozenset, set)):
        return sorted(clean(v) for v in obj)
    return obj


def read_json(path):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def read_graph(path) -> Multigraph:
    data = read_json(path)
    if isinstance(data, dict) and "graph" in data:
        data = data["graph"]
    return Multigraph.from_json(data)


def builtin_graph(text: str) -> Multigraph:
    """Graphs by name: K4, K3=, C5, P3, Q3, K222, petersen, or any gallery
    name such as complete(4)."""
    s = text.strip()
    named = {"Q3": mg.cube, "cube": mg.cube, "petersen": mg.petersen,
             "K222": lambda: mg.complete_multipartite(2, 2, 2)}
    if s in named:
        return named[s]()
    if s.startswith("K") and s[1:].rstrip("=").isdigit():
        k = int(s[1:].rstrip("="))
        return mg.complete_multi(k) if s.endswith("=") else mg.complete(k)
    if s[:1] in "CP" and s[1:].isdigit():
        return (mg.cycle if s[0] == "C" else mg.path)(int(s[1:]))
    name, n = parse_gallery_name(s)
    builders = {"cycle": mg.cycle, "complete": mg.complete, "complete_multi": mg.complete_multi,
                "path": mg.path, "tree": mg.path}
    if name in builders and n is not None:
        return builders[name](n)
    raise UsageError(f"unknown graph {text!r}")


def graph_arg(text: str) -> Multigraph:
    return read_graph(text) if Path(text).suffix == ".json" or Path(text).exists() else builtin_graph(text)


def cert_json(cert: Certificate, extra: dict | None = None) -> dict:
    out = cert.tensegrity.to_json()
    out["omega"] = cert.omega
    out["report"] = cert.report()
    if extra:
        out.update(extra)
    return out


def read_cert(path, tol) -> tuple[Certificate, dict]:
    data = read_json(path)
    T = Tensegrity.from_json(data)
    if "omega" not in data:
        raise UsageError(f"{path}: no 'omega' stress in file")
    return verify_super_stable(T, as_stress(T.graph, data["omega"]), tol), data


def format_text(obj, indent=0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not all(isinstance(x, (int, float, str)) for x in (v if isinstance(v, list) else [None])):
                lines.append(f"{pad}{k}:")
                lines.append(format_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        for v in obj:
            lines.append(f"{pad}- {json.dumps(v)}")
    else:
        lines.append(f"{pad}{obj}")
    return "\n".join(lines)


@dataclass
class Outcome:
    code: int
    payload: dict = field(default_factory=dict)


def emit(outcome: Outcome, args, stdout) -> None:
    data = clean(outcome.payload)
    if getattr(args, "format", "json") == "text":
        text = format_text(data) + "\n"
    else:
        text = json.dumps(data, indent=1, sort_keys=True) + "\n"
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
        summary = {k: data[k] for k in ("verdict", "status", "exit") if k in data}
        stdout.write(json.dumps(summary, sort_keys=True) + "\n" if summary else "")
    else:
        stdout.write(text)


# ------------------------------------------------------------------ commands

def verdict_code(v: Verdict) -> int:
    if v is Verdict.SUPER_STABLE:
        return OK
    return INDETERMINATE if v is Verdict.INDETERMINATE else NEGATIVE


def cmd_verify(args) -> Outcome:
    data = read_json(args.tensegrity)
    T = Tensegrity.from_json(data)
    if args.stress:
        sdata = read_json(args.stress)
        omega = sdata["omega"] if isinstance(sdata, dict) else sdata
        source = "file"
    elif "omega" in data:
        omega, source = data["omega"], "embedded"
    else:
        omega, source = search_stress(T, args.tol, seed=args.seed), "search"
        if omega is None:
            return Outcome(NEGATIVE, {"verdict": "NoStressFound", "stress_source": source,
                                      "notes": ["stress search found nothing; this proves nothing"]})
    cert = verify_super_stable(T, as_stress(T.graph, omega), args.tol)
    rep = cert.report()
    rep["stress_source"] = source
    return Outcome(verdict_code(cert.verdict), rep)


def cmd_gallery(args) -> Outcome:
    name, n = parse_gallery_name(args.name)
    if args.n is not None:
        n = args.n
    try:
        cert = gallery(name, n, tol=args.tol)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    return Outcome(OK, cert_json(cert, {"name": args.name}))


def cmd_construct(args) -> Outcome:
    op = args.op
    if op == "realize":
        G = graph_arg(args.input)
        name, n = parse_gallery_name(args.base)
        base = gallery(name, n, tol=args.tol)
        H = base.tensegrity.graph
        cert = realize_from_minor(G, H, transport_certificate(base, H, args.tol),
                                  injective=not args.allow_coincident, tol=args.tol)
        return Outcome(OK, cert_json(cert))
    cert, data = read_cert(args.input, args.tol)
    if op == "add-edge":
        out = add_edge(cert, args.u, args.v, args.sign, tol=args.tol)
    elif op == "subdivide":
        out = subdivide_cable(cert, args.edge, args.t, tol=args.tol)
    elif op == "ear":
        out = attach_ear(cert, args.u, args.v, args.length, tol=args.tol)
    elif op == "split":
        move = [int(x) for x in args.move.split(",") if x.strip()]
        out = split_vertex_certificate(cert, args.vertex, move, injective=args.injective, tol=args.tol)
    elif op == "cone":
        cc = cone_certificate(cert, args.tol)
        return Outcome(OK, cert_json(cc.certificate, {"cone_vertex": cc.cone_vertex}))
    elif op == "slice":
        if "cone_vertex" not in data:
            raise UsageError(f"{args.input}: slicing needs a 'cone_vertex' entry")
        normal = [float(x) for x in args.normal.split(",")]
        out = slice_cone(ConedCertificate(cert, int(data["cone_vertex"])), normal, args.offset, args.tol)
    else:  # argparse restricts the choices
        raise UsageError(f"unknown operation {op}")
    return Outcome(OK, cert_json(out))


def cmd_param(args) -> Outcome:
    G = graph_arg(args.graph)
    rep = param_report(G, certify=args.certify)
    payload = rep.to_json()
    payload["graph"] = G.to_json()
    if args.report:
        Path(args.report).write_text(json.dumps(clean(payload), indent=1, sort_keys=True) + "\n")
    return Outcome(OK, payload)


def cmd_minor(args) -> Outcome:
    G, H = graph_arg(args.graph), graph_arg(args.minor)
    model = has_minor(G, H)
    if model is None:
        return Outcome(NEGATIVE, {"minor": False})
    return Outcome(OK, {"minor": True,
                        "branch_sets": {str(k): sorted(v) for k, v in model.branch_sets.items()},
                        "edge_witness": {str(k): v for k, v in model.edge_witness.items()}})


def cmd_fold(args) -> Outcome:
    T = Tensegrity.from_json(read_json(args.tensegrity))
    if args.td:
        td = TreeDecomposition.from_json(read_json(args.td))
    else:
        tw, td, tried = find_lacking_td(T.graph)
        if td is None:
            return Outcome(NEGATIVE, {"status": "no lacking optimal decomposition", "treewidth": tw,
                                      "orderings_tried": tried})
    try:
        q = fold(T, td, args.tol)
    except FoldError as exc:
        return Outcome(NEGATIVE, {"status": "fold failed", "reason": str(exc)})
    out = T.with_points(q).to_json()
    out["td"] = td.to_json()
    out["status"] = "folded"
    return Outcome(OK, out)


def _run_job(job, index: int) -> dict:
    argv = job["argv"] if isinstance(job, dict) else job
    expect = job.get("expect", OK) if isinstance(job, dict) else OK
    buf = io.StringIO()
    err = io.StringIO()
    try:
        code = run([str(a) for a in argv], stdout=buf, stderr=err)
    except Exception as exc:  # isolate the batch from any job
        code, err = USAGE, io.StringIO(f"{type(exc).__name__}: {exc}")
    return {"job": index, "argv": list(map(str, argv)), "exit": code, "expect": expect,
            "pass": code == expect, "error": err.getvalue().strip() or None}


def cmd_batch(args) -> Outcome:
    manifest = read_json(args.manifest)
    jobs = manifest.get("jobs", []) if isinstance(manifest, dict) else manifest
    if not isinstance(jobs, list):
        raise UsageError(f"{args.manifest}: 'jobs' must be a list")
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        rows = list(pool.map(_run_job, jobs, range(len(jobs))))
    passed = sum(r["pass"] for r in rows)
    return Outcome(OK if passed == len(rows) else NEGATIVE,
                   {"total": len(rows), "passed": passed, "failed": len(rows) - passed, "jobs": rows})


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", "-o", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="json")

    p = _Parser(prog="superstab", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("verify", parents=[common], help="certify a tensegrity")
    s.add_argument("tensegrity")
    s.add_argument("--stress")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("gallery", parents=[common], help="emit a gallery certificate")
    s.add_argument("name", help="tree, cycle(n), complete(n), complete_multi(n), prism, dihedral_star, k4_square")
    s.add_argument("--n", type=int)
    s.set_defaults(func=cmd_gallery)

    s = sub.add_parser("construct", parents=[common], help="apply a construction operator")
    s.add_argument("op", choices=("add-edge", "subdivide", "ear", "split", "cone", "slice", "realize"))
    s.add_argument("input", help="certificate JSON (graph for realize)")
    s.add_argument("--u", type=int)
    s.add_argument("--v", type=int)
    s.add_argument("--sign", type=int, choices=(1, -1))
    s.add_argument("--edge", type=int)
    s.add_argument("--t", type=float, default=0.5)
    s.add_argument("--length", type=int, default=1)
    s.add_argument("--vertex", type=int)
    s.add_argument("--move", default="", help="comma separated edge ids")
    s.add_argument("--injective", action="store_true")
    s.add_argument("--normal", default=None, help="comma separated hyperplane normal")
    s.add_argument("--offset", type=float, default=1.0)
    s.add_argument("--base", default=None, help="gallery minor for realize, e.g. complete(5)")
    s.add_argument("--allow-coincident", action="store_true")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("param", parents=[common], help="lambda, nu, rd and friends")
    s.add_argument("graph", help="graph JSON or a name such as K4, C6, Q3")
    s.add_argument("--report")
    s.add_argument("--certify", action="store_true")
    s.set_defaults(func=cmd_param)

    s = sub.add_parser("minor", parents=[common], help="minor containment with a witness model")
    s.add_argument("graph")
    s.add_argument("minor")
    s.set_defaults(func=cmd_minor)

    s = sub.add_parser("fold", parents=[common], help="fold a tensegrity along a lacking decomposition")
    s.add_argument("tensegrity")
    s.add_argument("--td")
    s.set_defaults(func=cmd_fold)

    s = sub.add_parser("batch", parents=[common], help="run a manifest of jobs")
    s.add_argument("manifest")
    s.add_argument("--jobs", type=int, default=4)
    s.set_defaults(func=cmd_batch)
    return p


_REQUIRED = {"add-edge": ("u", "v"), "subdivide": ("edge",), "ear": ("u", "v"),
             "split": ("vertex",), "slice": ("normal",), "realize": ("base",)}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command == "construct":
            missing = [f"--{k}" for k in _REQUIRED.get(args.op, ()) if getattr(args, k) is None]
            if missing:
                raise UsageError(f"construct {args.op} needs {', '.join(missing)}")
        outcome = args.func(args)
    except UsageError as exc:
        stderr.write(f"error: {exc}\n")
        return USAGE
    except (GraphError, TensegrityError, ParamError, KeyError, TypeError, ValueError) as exc:
        stderr.write(f"error: invalid input: {exc}\n")
        return USAGE
    except ConstructionError as exc:
        stderr.write(f"error: construction failed: {exc}\n")
        return NEGATIVE
    emit(outcome, args, stdout)
    return outcome.code


def main() -> None:
    sys.exit(run())
