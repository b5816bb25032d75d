"""Text formats for models (TAC), cycles and intersection points.

All three are line based and integer only. The first line is a versioned
header. Blank lines and lines starting with ``#`` are ignored. Parse errors are
reported with the offending line number.

TAC::

    TAC 1
    dimension 2
    vertices 49
    simplex <id> <v0> ... <vk>        every simplex, ids in (dim, lex) order
    delta <id> ...                    optional, may repeat
    boundary <id> ...                 optional, may repeat
    provenance fine|coarse            optional
    local_system <rank> <base top id>
    transition <from id> <to id> <row-major entries>
    orientation <top id> <+1|-1>      optional reference sign
    end

Cycle files store one coefficient per simplex in the chart frame of the
simplex's anchor cell (its first top coface), in the lex wedge basis::

    CYCLE 1
    name goggle
    degree <p> <q>
    cell <simplex id> <coefficients>
    end
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .exact_algebra import ExactMatrix
from .local_system import LocalSystem, LocalSystemError, transport
from .model_library import Model, TropicalCycle
from .simplicial_complex import ComplexError, DeltaComplex
from .symple import codim2_ring

VERSION = 1


class TacError(ValueError):
    """Malformed or inconsistent input; carries the line number when known."""

    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


class VerificationError(RuntimeError):
    """A loaded model or cycle fails its invariants."""


@dataclass
class TacDocument:
    complex: DeltaComplex
    system: LocalSystem
    provenance: str | None = None


# ---------------------------------------------------------------- writing

def _ids(K: DeltaComplex) -> dict:
    order = K.all_simplices()
    return {s: i for i, s in enumerate(order)}


def dump_tac(K: DeltaComplex, L: LocalSystem, provenance: str | None = None) -> str:
    ids = _ids(K)
    out = [f"TAC {VERSION}", f"dimension {K.n}", f"vertices {K.num(0)}"]
    for s, i in ids.items():
        out.append(f"simplex {i} " + " ".join(map(str, s)))
    for name, flag in (("delta", K.delta), ("boundary", K.boundary)):
        got = sorted(ids[s] for s in flag)
        for k in range(0, len(got), 16):
            out.append(name + " " + " ".join(map(str, got[k:k + 16])))
    if provenance:
        out.append(f"provenance {provenance}")
    out.append(f"local_system {L.rank} {ids[L.base_cells[0]]}")
    for a, b, M in L.explicit_transitions():
        flat = [x for row in M.entries for x in row]
        out.append(f"transition {ids[a]} {ids[b]} " + " ".join(map(str, flat)))
    o = K.orient()
    out.append(f"orientation {ids[K.top[0]]} {o[K.top[0]]:+d}")
    out.append("end")
    return "\n".join(out) + "\n"


def dump_cycle(L: LocalSystem, cycle: TropicalCycle) -> str:
    ids = _ids(L.base)
    out = [f"CYCLE {VERSION}", f"name {cycle.name or 'cycle'}", f"degree {cycle.p} {cycle.q}"]
    for s in sorted(cycle.cells, key=lambda s: ids[s]):
        a = L.anchor(s)
        v = L.wedge(L._g[a], cycle.p).apply(list(cycle.cells[s]))
        out.append(f"cell {ids[s]} " + " ".join(map(str, v)))
    out.append("end")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- reading

def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield no, line.split()


def _ints(tokens, no):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise TacError(f"expected integers, got {' '.join(tokens)!r}", no) from None


def _header(it, magic: str):
    try:
        no, tok = next(it)
    except StopIteration:
        raise TacError("empty input", 1) from None
    if tok[0] != magic or len(tok) != 2:
        raise TacError(f"expected header '{magic} {VERSION}'", no)
    if tok[1] != str(VERSION):
        raise TacError(f"unsupported version {tok[1]}", no)


def load_tac(text: str) -> TacDocument:
    it = _lines(text)
    _header(it, "TAC")
    dim = nverts = rank = base = None
    simplices: dict[int, tuple] = {}
    delta, boundary, trans = [], [], []
    provenance = orientation = None
    ended = False
    last = 1
    for no, tok in it:
        last = no
        key, args = tok[0], tok[1:]
        if ended:
            raise TacError("content after 'end'", no)
        if key == "dimension":
            (dim,) = _ints(args, no)
        elif key == "vertices":
            (nverts,) = _ints(args, no)
        elif key == "simplex":
            vals = _ints(args, no)
            if len(vals) < 2:
                raise TacError("simplex needs an id and vertices", no)
            if vals[0] in simplices:
                raise TacError(f"duplicate simplex id {vals[0]}", no)
            simplices[vals[0]] = (tuple(vals[1:]), no)
        elif key in ("delta", "boundary"):
            (delta if key == "delta" else boundary).extend((v, no) for v in _ints(args, no))
        elif key == "provenance":
            if args not in (["fine"], ["coarse"]):
                raise TacError("provenance must be 'fine' or 'coarse'", no)
            provenance = args[0]
        elif key == "local_system":
            rank, base = _ints(args, no)
        elif key == "transition":
            trans.append((_ints(args, no), no))
        elif key == "orientation":
            orientation = (_ints(args, no), no)
        elif key == "end":
            ended = True
        else:
            raise TacError(f"unknown keyword {key!r}", no)
    if not ended:
        raise TacError("missing 'end'", last)
    if dim is None or nverts is None or rank is None:
        raise TacError("dimension, vertices and local_system are required", last)

    def sid(i, no):
        if i not in simplices:
            raise TacError(f"unknown simplex id {i}", no)
        return simplices[i][0]
    try:
        K = DeltaComplex([s for s, _ in simplices.values()], dim,
                         delta=[sid(i, no) for i, no in delta],
                         boundary=[sid(i, no) for i, no in boundary])
    except ComplexError as e:
        raise TacError(f"invalid complex: {e}") from None
    if K.num(0) != nverts:
        raise TacError(f"{K.num(0)} vertices found, {nverts} declared")
    ids = _ids(K)
    for i, (s, no) in simplices.items():
        if ids.get(s) != i:
            raise TacError(f"simplex {i} is out of canonical order", no)
    if len(simplices) != len(ids):
        raise TacError("the simplex list is not closed under faces")
    T = {}
    for vals, no in trans:
        if len(vals) != 2 + rank * rank:
            raise TacError(f"transition needs {rank * rank} entries", no)
        a, b = sid(vals[0], no), sid(vals[1], no)
        rows = [vals[2 + r * rank: 2 + (r + 1) * rank] for r in range(rank)]
        T[(a, b)] = ExactMatrix(rows, rank, rank)
    try:
        L = LocalSystem(K, rank, T, base_cells=[sid(base, last)])
    except LocalSystemError as e:
        raise TacError(f"invalid local system: {e}") from None
    if orientation is not None:
        (top, sign), no = orientation
        c = sid(top, no)
        if sign not in (1, -1) or len(c) != dim + 1:
            raise TacError("orientation needs a top simplex and a sign", no)
        K.orientation = None
        K.orient({c: sign})
    return TacDocument(K, L, provenance)


def load_cycle(text: str, L: LocalSystem, check: bool = True) -> TropicalCycle:
    it = _lines(text)
    _header(it, "CYCLE")
    K = L.base
    order = K.all_simplices()
    name, p, q, cells, ended, last = "cycle", None, None, {}, False, 1
    for no, tok in it:
        last = no
        key, args = tok[0], tok[1:]
        if ended:
            raise TacError("content after 'end'", no)
        if key == "name":
            name = " ".join(args)
        elif key == "degree":
            p, q = _ints(args, no)
        elif key == "cell":
            if p is None:
                raise TacError("'degree' must precede cells", no)
            vals = _ints(args, no)
            if not 0 <= vals[0] < len(order):
                raise TacError(f"unknown simplex id {vals[0]}", no)
            s = order[vals[0]]
            if len(s) != q + 1:
                raise TacError(f"simplex {vals[0]} does not have dimension {q}", no)
            if len(vals) - 1 != comb(L.rank, p):
                raise TacError(f"coefficient needs {comb(L.rank, p)} entries", no)
            a = L.anchor(s)
            cells[s] = L.wedge(L._ginv[a], p).apply(vals[1:])
        elif key == "end":
            ended = True
        else:
            raise TacError(f"unknown keyword {key!r}", no)
    if not ended or p is None:
        raise TacError("incomplete cycle file", last)
    cyc = TropicalCycle(p, q, cells, name)
    if check:
        check_cycle(L, cyc)
    return cyc


def check_cycle(L: LocalSystem, cyc: TropicalCycle, rel: str | None = None) -> None:
    """Coefficients lie in the sheaf lattices and the boundary vanishes."""
    from .constructible_sheaf import pushforward_sheaf
    from .homology_engine import HomologyError, chain_complex
    C = chain_complex(L.base, pushforward_sheaf(L, cyc.p), rel)
    try:
        ch = C.chain_from_cells(cyc.q, cyc.cells)
    except HomologyError as e:
        raise VerificationError(str(e)) from None
    if cyc.q > 0 and C.boundary_of(cyc.q, ch):
        raise VerificationError(f"cycle {cyc.name!r} has nonzero boundary")


# ---------------------------------------------------------------- points

def load_points(text: str) -> tuple[list, int]:
    """Intersection points for the local formula.

    Header ``POINTS 1`` then ``ambient <n> <p_V> <p_W>`` and one line per point::

        point <V directions> | <W directions> | <xi> | <zeta>

    Directions are concatenated vectors of length n. xi and zeta are wedge
    vectors in the lex basis. An optional ``omega <k>`` line scales Ω.
    """
    from .pairing_intersection import IntersectionPoint
    it = _lines(text)
    _header(it, "POINTS")
    n = pV = pW = None
    omega, pts, ended, last = 1, [], False, 1
    for no, tok in it:
        last = no
        key, args = tok[0], tok[1:]
        if key == "ambient":
            n, pV, pW = _ints(args, no)
        elif key == "omega":
            (omega,) = _ints(args, no)
        elif key == "point":
            if n is None:
                raise TacError("'ambient' must precede points", no)
            groups = " ".join(args).split("|")
            if len(groups) != 4:
                raise TacError("a point needs four '|'-separated groups", no)
            dv, dw, xi, zeta = (_ints(g.split(), no) for g in groups)
            if len(dv) % n or len(dw) % n:
                raise TacError("direction lengths must be multiples of n", no)
            if len(xi) != comb(n, pV) or len(zeta) != comb(n, pW):
                raise TacError("coefficient lengths do not match the wedge degrees", no)
            try:
                pts.append(IntersectionPoint([dv[i:i + n] for i in range(0, len(dv), n)],
                                             [dw[i:i + n] for i in range(0, len(dw), n)],
                                             xi, zeta, f"line {no}"))
            except ValueError as e:
                raise TacError(str(e), no) from None
        elif key == "end":
            ended = True
        else:
            raise TacError(f"unknown keyword {key!r}", no)
    if not ended:
        raise TacError("missing 'end'", last)
    return pts, omega


# ---------------------------------------------------------------- verification

def verify_cocycle(K: DeltaComplex, L: LocalSystem) -> int:
    """Monodromy around interior codim-2 simplices: identity off Δ, unipotent of
    the form id + N with N² = 0 and N ≠ 0 on Δ. Returns the number of loops."""
    ident = ExactMatrix.identity(L.rank)
    zero = ExactMatrix.zeros(L.rank, L.rank)
    count = 0
    for s in K.simplices[K.n - 2] if K.n >= 2 else []:
        if s in K.boundary:
            continue
        ring = codim2_ring(K, s)
        if ring is None:
            continue
        M = transport(L, ring + [ring[0]])
        if s in K.delta:
            N = M - ident
            if N == zero or N @ N != zero:
                raise VerificationError(f"monodromy around {s} is not a transvection")
        elif M != ident:
            raise VerificationError(f"nontrivial monodromy around {s} outside Δ")
        count += 1
    return count


def model_to_files(model: Model, provenance: str | None = "fine") -> dict:
    """{filename suffix: text} for a model and its bundled cycles."""
    K, L = model
    out = {".tac": dump_tac(K, L, provenance)}
    for name in model.cycles:
        out[f".{name}.cyc"] = dump_cycle(L, model.cycles[name])
    return out
