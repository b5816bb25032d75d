"""Command-line frontend.

Exit codes: 0 success, 1 usage, 2 parse or validation error, 3 internal
verification failure. Reports are plain text. With ``--machine`` every number
is printed as one ``key value`` line instead.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import tac
from .exact_algebra import ExactMatrix

EXAMPLES = ("focus-focus", "goggles-shared", "goggles-parallel", "torsion", "cube-k3",
            "conifold", "symple:<P>x<Q>[:c<k>][:b<f>]")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class Report:
    """Ordered (key, value) records rendered as a table or as key-value lines."""

    def __init__(self):
        self.rows: list[tuple[str, object]] = []

    def add(self, key: str, value) -> None:
        self.rows.append((key, value))

    @staticmethod
    def _fmt(v, machine: bool) -> str:
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, ExactMatrix):
            v = v.tolist()
        if isinstance(v, (list, tuple)):
            if not v or (isinstance(v[0], (list, tuple)) and not v[0]):
                return "-" if machine else "[]"
            if isinstance(v[0], (list, tuple)):
                return ";".join(",".join(map(str, r)) for r in v) if machine else \
                    "\n" + "\n".join("  " + " ".join(f"{x:3d}" for x in r) for r in v)
            return ",".join(map(str, v)) if machine else "[" + ", ".join(map(str, v)) + "]"
        return str(v)

    def render(self, machine: bool) -> str:
        if machine:
            return "".join(f"{k} {self._fmt(v, True)}\n" for k, v in self.rows)
        width = max((len(k) for k, _ in self.rows), default=0)
        return "".join(f"{k.ljust(width)} : {self._fmt(v, False)}\n" for k, v in self.rows)


# ---------------------------------------------------------------- helpers

def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise tac.TacError(f"{path}: {e.strerror}") from None


def _load(path: str) -> tac.TacDocument:
    text = _read(path)
    try:
        return tac.load_tac(text)
    except tac.TacError as e:
        raise tac.TacError(f"{path}: {e}") from None


def _sheaf(doc: tac.TacDocument, spec: str, kind: str = "closed"):
    from .constructible_sheaf import SheafFunctor
    from .local_system import dual_system
    name, _, p = spec.partition(":")
    if name not in ("wedge", "dual-wedge", "constant") or (name != "constant" and not p.isdigit()):
        raise UsageError(f"sheaf must be wedge:<p>, dual-wedge:<p> or constant, got {spec!r}")
    L = doc.system
    if name == "constant":
        return SheafFunctor(L, 0, kind), 0
    p = int(p)
    if p > L.rank:
        raise UsageError(f"wedge degree {p} exceeds the rank {L.rank}")
    if name == "dual-wedge":
        return SheafFunctor(dual_system(L), p, kind, dual=True), p
    return SheafFunctor(L, p, kind), p


def _groups(rep: Report, groups, prefix: str) -> None:
    for h in groups:
        rep.add(f"{prefix}{h.degree}.betti", h.betti)
        rep.add(f"{prefix}{h.degree}.torsion", list(h.torsion))


def _warn_provenance(doc: tac.TacDocument) -> None:
    if doc.provenance != "fine":
        print("warning: the model is not flagged as finely triangulated; "
              "the pairing may not be the duality pairing", file=sys.stderr)


# ---------------------------------------------------------------- commands

def cmd_homology(args) -> Report:
    from .homology_engine import chain_complex, homology
    doc = _load(args.input)
    F, _ = _sheaf(doc, args.sheaf)
    rel = None if args.rel == "none" else args.rel
    rep = Report()
    _groups(rep, homology(chain_complex(doc.complex, F, rel), args.field, representatives=False), "H_")
    return rep


def cmd_cohomology(args) -> Report:
    from .cech_cohomology import cohomology
    doc = _load(args.input)
    F, p = _sheaf(doc, args.sheaf)
    rel = None if args.rel == "none" else args.rel
    groups = cohomology(doc.complex, F.L, p, rel, args.cover, args.field, F.dual)
    # the max-cell nerve has degrees above n; print them only when nonzero
    n = doc.complex.n
    groups = [h for h in groups if h.degree <= n or h.betti or h.torsion]
    rep = Report()
    _groups(rep, groups, "H^")
    return rep


def cmd_pairing(args) -> Report:
    from .pairing_intersection import pairing_matrix
    doc = _load(args.input)
    _warn_provenance(doc)
    r = pairing_matrix(doc.complex, doc.system, args.p, args.q, field=args.field)
    rep = Report()
    rep.add("homology_rank", r.homology_rank)
    rep.add("cohomology_rank", r.cohomology_rank)
    rep.add("gram_shape", [r.gram.rows, r.gram.cols])
    rep.add("gram", r.gram)
    rep.add("divisors", list(r.divisors))
    rep.add("perfect_over_Q", r.perfect_over_Q)
    rep.add("perfect_over_Z", r.perfect_over_Z)
    return rep


def cmd_intersect(args) -> Report:
    from .pairing_intersection import intersection_number, intersection_via_pairing
    rep = Report()
    if args.points:
        if args.tac or args.cycles:
            raise UsageError("use either --points or --tac with --cycles")
        pts, omega = tac.load_points(_read(args.points))
        omega = args.omega if args.omega is not None else omega
        rep.add("points", len(pts))
        rep.add("intersection", intersection_number(pts, omega))
        return rep
    if not args.tac or not args.cycles or len(args.cycles) != 2:
        raise UsageError("intersect needs --points FILE or --tac FILE --cycles V W")
    doc = _load(args.tac)
    _warn_provenance(doc)
    V, W = (tac.load_cycle(_read(c), doc.system) for c in args.cycles)
    rep.add("V", V.name)
    rep.add("W", W.name)
    rep.add("intersection", intersection_via_pairing(doc.system, V, W, args.omega or 1))
    return rep


def cmd_duality(args) -> Report:
    from .cech_cohomology import verify_pl_duality
    doc = _load(args.input)
    specs = [args.sheaf] if args.sheaf else [f"wedge:{p}" for p in range(doc.system.rank + 1)]
    rep = Report()
    ok = True
    for spec in specs:
        F, _ = _sheaf(doc, spec)
        r = verify_pl_duality(doc.complex, F, args.cover)
        ok &= r["ok"]
        for row in r["rows"]:
            if "extra_cohomology_degree" in row:
                rep.add(f"{spec}.extra_degree", row["extra_cohomology_degree"])
                continue
            k = row["k"]
            rep.add(f"{spec}.H_{k}(B,dB)", list(row["H_k(B,dB)"][:1]) + list(row["H_k(B,dB)"][1]))
            rep.add(f"{spec}.H^{doc.complex.n - k}(B)", list(row["H^n-k(B)"][:1]) + list(row["H^n-k(B)"][1]))
            rep.add(f"{spec}.H_{k}(B)", list(row["H_k(B)"][:1]) + list(row["H_k(B)"][1]))
            rep.add(f"{spec}.H^{doc.complex.n - k}(B,dB)", list(row["H^n-k(B,dB)"][:1]) + list(row["H^n-k(B,dB)"][1]))
        rep.add(f"{spec}.ok", r["ok"])
    rep.add("ok", ok)
    if not ok:
        args._status = 3
    return rep


def parse_polytope(text: str):
    from .symple import LatticePolygon, LatticeSimplex, SympleError
    t = text.strip()
    try:
        if t.startswith("std") and t[3:].isdigit():
            return LatticeSimplex.standard(int(t[3:]))
        if t.startswith("seg") and t[3:].isdigit():
            return LatticeSimplex.interval(int(t[3:]))
        if t == "square":
            return LatticePolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
        verts = [tuple(int(x) for x in v.split(",")) for v in t.strip("[]").split(";")]
        if len(verts) == len(verts[0]) + 1:
            return LatticeSimplex(verts)
        return LatticePolygon(verts)
    except (ValueError, SympleError) as e:
        raise tac.TacError(f"bad polytope {text!r}: {e}") from None


def cmd_punctured(args) -> Report:
    from .model_library import complex_CD_machinery, prop_2_12_prediction, punctured_cech_S
    P, Q = parse_polytope(args.triangle), parse_polytope(args.cotriangle)
    _, ranks = punctured_cech_S(P, Q)
    want = prop_2_12_prediction(P.dim, Q.dim)
    width = max(len(ranks), len(want))
    ranks = list(ranks) + [0] * (width - len(ranks))
    want = list(want) + [0] * (width - len(want))
    rep = Report()
    rep.add("dims", [P.dim, Q.dim])
    rep.add("H^k(S).computed", ranks)
    rep.add("H^k(S).predicted", want)
    cd = complex_CD_machinery(P, Q)
    rep.add("tensor_ranks", cd["tensor"])
    rep.add("ok", ranks == want)
    if ranks != want:
        args._status = 3
    return rep


def build_example(name: str):
    """(model, provenance) for a catalog name."""
    from . import model_library as ml
    if name == "focus-focus":
        return ml.build_focus_focus(), "fine"
    if name == "goggles-shared":
        return ml.build_goggles("shared_line"), "fine"
    if name == "goggles-parallel":
        return ml.build_goggles("parallel_lines"), "fine"
    if name == "torsion" or name.startswith("torsion:"):
        dirs = [(1, 1), (1, -1)]
        if name != "torsion":
            try:
                dirs = [tuple(int(x) for x in d.split(",")) for d in name.split(":")[1:]]
            except ValueError:
                raise tac.TacError(f"bad torsion directions in {name!r}") from None
            if len(dirs) != 2 or any(len(d) != 2 for d in dirs):
                raise tac.TacError("torsion needs two planar directions: torsion:a,b:c,d")
        try:
            return ml.build_torsion_pair(*dirs), "fine"
        except ValueError as e:
            raise tac.TacError(str(e)) from None
    if name == "cube-k3":
        return ml.build_cube_k3(), "fine"
    if name == "conifold":
        return ml.build_conifold(), "fine"
    if name.startswith("symple:"):
        body, *opts = name[len("symple:"):].split(":")
        for sep in ("×", "/", "x"):
            if sep in body:
                a, b = body.split(sep, 1)
                break
        else:
            raise tac.TacError(f"symple spec needs two polytopes: {name!r}")
        c = fineness = 0
        for o in opts:
            if o[:1] in ("c", "b") and o[1:].isdigit():
                if o[0] == "c":
                    c = int(o[1:])
                else:
                    fineness = int(o[1:])
            else:
                raise tac.TacError(f"unknown symple option {o!r}")
        from .symple import SympleError
        try:
            spec = ml.SympleModelSpec(parse_polytope(a), parse_polytope(b), c)
        except SympleError as e:
            raise tac.TacError(str(e)) from None
        return ml.build_symple_model(spec, fineness), "fine" if fineness else "coarse"
    raise tac.TacError(f"unknown example {name!r}; catalog: {', '.join(EXAMPLES)}")


def _slug(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)


def cmd_example(args) -> Report:
    model, prov = build_example(args.name)
    os.makedirs(args.out, exist_ok=True)
    rep = Report()
    files = tac.model_to_files(model, prov)
    for suffix in sorted(files):
        path = os.path.join(args.out, _slug(args.name) + suffix)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(files[suffix])
        rep.add("wrote", os.path.basename(path))
    rep.add("cycles", len(files) - 1)
    return rep


def cmd_validate(args) -> Report:
    doc = _load(args.input)
    rep = Report()
    K = doc.complex
    rep.add("dimension", K.n)
    rep.add("simplices", [K.num(d) for d in range(K.n + 1)])
    rep.add("delta_simplices", len(K.delta))
    rep.add("boundary_simplices", len(K.boundary))
    rep.add("loops_checked", tac.verify_cocycle(K, doc.system))
    for path in args.cycles or []:
        c = tac.load_cycle(_read(path), doc.system)
        rep.add(f"cycle.{c.name}", "ok")
    rep.add("ok", True)
    return rep


# ---------------------------------------------------------------- entry point

def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tropcycles", description="Tropical homology of affine manifolds with singularities.")
    ap.add_argument("--machine", action="store_true", help="print 'key value' lines")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def sheaf_flags(p):
        p.add_argument("--sheaf", default="wedge:1", help="wedge:<p>, dual-wedge:<p> or constant")
        p.add_argument("--field", choices=("Z", "Q"), default="Z")

    p = sub.add_parser("homology", help="homology of a constructible sheaf")
    p.add_argument("input")
    sheaf_flags(p)
    p.add_argument("--rel", choices=("none", "delta", "boundary"), default="none")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("cohomology", help="Čech cohomology")
    p.add_argument("input")
    sheaf_flags(p)
    p.add_argument("--rel", choices=("none", "boundary"), default="none")
    p.add_argument("--cover", choices=("auto", "vertex_star", "max_cell"), default="auto")
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("pairing", help="gram matrix of the homology-cohomology pairing")
    p.add_argument("input")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--field", choices=("Z", "Q"), default="Z")
    p.set_defaults(func=cmd_pairing)

    p = sub.add_parser("intersect", help="intersection number of two cycles or of listed points")
    p.add_argument("--tac")
    p.add_argument("--cycles", nargs="+")
    p.add_argument("--points")
    p.add_argument("--omega", type=int)
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("duality", help="Poincaré-Lefschetz duality check")
    p.add_argument("input")
    p.add_argument("--sheaf", help="one sheaf instead of all wedge powers")
    p.add_argument("--cover", choices=("auto", "vertex_star", "max_cell"), default="auto")
    p.set_defaults(func=cmd_duality)

    p = sub.add_parser("punctured", help="cohomology of S on a punctured symple neighbourhood")
    p.add_argument("triangle", help="std<d>, seg<l>, square or 'x,y;x,y;...'")
    p.add_argument("cotriangle")
    p.set_defaults(func=cmd_punctured)

    p = sub.add_parser("example", help="write a catalog model and its cycles")
    p.add_argument("name", help="; ".join(EXAMPLES))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("validate", help="parse a model (and cycles) and re-check invariants")
    p.add_argument("input")
    p.add_argument("--cycles", nargs="*")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    from .model_library import ModelError
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(
                ("homology", "cohomology", "pairing", "intersect", "duality", "punctured",
                 "example", "validate")))
        args._status = 0
        rep = args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except tac.TacError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (tac.VerificationError, ModelError) as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(rep.render(args.machine))
    return args._status


if __name__ == "__main__":
    sys.exit(main())
