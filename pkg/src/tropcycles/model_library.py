"""Generators for the example affine manifolds with singularities.

Two-dimensional examples are triangulated grids. Each focus-focus point carries
an invariant direction m and a slit running to the boundary along a grid line.
Crossing the slit from its left side to its right side applies
T_m(v) = v + det(m, v) m, so a small clockwise loop has monodromy T_m.
"""

from __future__ import annotations

from itertools import combinations, product
from math import comb, gcd
from typing import Sequence

from .exact_algebra import (
    ExactMatrix, Lattice, inverse_unimodular, kernel_lattice, rational_rank, solve_integer,
)
from .local_system import (
    LocalSystem, LocalSystemError, focus_focus, star_monodromy, transport,
    transvection,
)
from .simplicial_complex import DeltaComplex, Simplex, closed_star, faces_of


class ModelError(RuntimeError):
    """A generated model failed its internal consistency checks."""


class TropicalCycle:
    """A simplicial q-chain with coefficients in the p-th wedge power.

    ``cells`` maps q-simplices to coefficient vectors, written in the frame of
    each simplex's anchor cell.
    """

    def __init__(self, p: int, q: int, cells: dict, name: str = ""):
        self.p = p
        self.q = q
        self.cells = {tuple(s): list(v) for s, v in cells.items() if any(v)}
        self.name = name

    def __repr__(self):
        return f"TropicalCycle({self.name!r}, p={self.p}, q={self.q}, {len(self.cells)} cells)"


class Model:
    """Bundle of a complex, its local system and named cycles."""

    def __init__(self, name: str, complex: DeltaComplex, system: LocalSystem,
                 cycles: dict | None = None, info: dict | None = None):
        self.name = name
        self.complex = complex
        self.system = system
        self.cycles = cycles or {}
        self.info = info or {}

    def __iter__(self):
        yield self.complex
        yield self.system


# ---------------------------------------------------------------- grids

def grid_complex(W: int, H: int, diagonal=None) -> tuple[DeltaComplex, dict]:
    """Triangulated rectangle [0,W]x[0,H] with its boundary flagged.

    Unit squares are cut along the diagonal (x,y)-(x+1,y+1), except the two
    corner squares where that diagonal would join two boundary vertices. There
    the other diagonal keeps every cell meeting the boundary in a single face.
    Returns the complex (without discriminant) and the map point -> vertex.
    """
    if diagonal is None:
        def diagonal(x, y):
            return (x, y) not in ((0, H - 1), (W - 1, 0)) or W == 1 or H == 1
    vid = {}
    for x in range(W + 1):
        for y in range(H + 1):
            vid[(x, y)] = len(vid)
    coords = [None] * len(vid)
    for pt, i in vid.items():
        coords[i] = pt
    tris = []
    for x in range(W):
        for y in range(H):
            a, b, c, d = vid[(x, y)], vid[(x + 1, y)], vid[(x + 1, y + 1)], vid[(x, y + 1)]
            if diagonal(x, y):
                tris.append(tuple(sorted((a, b, c))))
                tris.append(tuple(sorted((a, c, d))))
            else:
                tris.append(tuple(sorted((a, b, d))))
                tris.append(tuple(sorted((b, c, d))))
    bnd = []
    for x in range(W):
        bnd.append(tuple(sorted((vid[(x, 0)], vid[(x + 1, 0)]))))
        bnd.append(tuple(sorted((vid[(x, H)], vid[(x + 1, H)]))))
    for y in range(H):
        bnd.append(tuple(sorted((vid[(0, y)], vid[(0, y + 1)]))))
        bnd.append(tuple(sorted((vid[(W, y)], vid[(W, y + 1)]))))
    return DeltaComplex(tris, 2, boundary=bnd, coords=coords), vid


def _cross(u, v) -> int:
    return u[0] * v[1] - u[1] * v[0]


def slit_transitions(K: DeltaComplex, vid: dict, point, m, slit) -> dict:
    """Transitions for one focus-focus point whose slit runs along ``slit``.

    For every edge of the slit, the transition from the triangle on the left of
    the slit direction to the one on the right is T_m.
    """
    A = focus_focus(m)
    out = {}
    x, y = point
    sx, sy = slit
    while True:
        nxt = (x + sx, y + sy)
        if nxt not in vid:
            break
        e = tuple(sorted((vid[(x, y)], vid[nxt])))
        cs = K.cofaces(e)
        if len(cs) == 2:
            sides = {}
            for c in cs:
                w = next(v for v in c if v not in e)
                sides[_cross(slit, (K.coords[w][0] - x, K.coords[w][1] - y)) > 0] = c
            out[(sides[True], sides[False])] = A
        x, y = nxt
    return out


def _combine(trans: dict, new: dict) -> dict:
    """Compose transitions on shared edges (new ones applied after old ones)."""
    for (a, b), M in new.items():
        if (a, b) in trans:
            trans[(a, b)] = M @ trans[(a, b)]
        elif (b, a) in trans:
            trans[(b, a)] = trans[(b, a)] @ inverse_unimodular(M)
        else:
            trans[(a, b)] = M
    return trans


def _clockwise_ring(K: DeltaComplex, v: int) -> list[Simplex]:
    """Top cells around an interior vertex in clockwise order."""
    cells = list(K.top_cofaces((v,)))
    c0 = K.coords[v]

    def angle_key(c):
        from math import atan2
        pts = [K.coords[w] for w in c if w != v]
        mx = sum(p[0] for p in pts) / 2 - c0[0]
        my = sum(p[1] for p in pts) / 2 - c0[1]
        return -atan2(my, mx)
    return sorted(cells, key=angle_key)


def loop_monodromy(L: LocalSystem, v: int) -> ExactMatrix:
    """Monodromy of the clockwise loop of cells around an interior 2d vertex."""
    ring = _clockwise_ring(L.base, v)
    return transport(L, ring + [ring[0]])


def focus_focus_disc(points: Sequence, W: int, H: int, name="focus-focus") -> Model:
    """Grid disc with focus-focus points given as (point, m, slit direction)."""
    K, vid = grid_complex(W, H)
    trans: dict = {}
    for pt, m, slit in points:
        trans = _combine(trans, slit_transitions(K, vid, pt, m, slit))
    delta = [(vid[tuple(pt)],) for pt, _, _ in points]
    K = K.with_flags(delta=delta)
    L = LocalSystem(K, 2, trans)
    _verify_2d(L, {vid[tuple(pt)]: m for pt, m, _ in points})
    return Model(name, K, L, info={"vid": vid, "points": [tuple(p) for p, _, _ in points],
                                   "directions": [tuple(m) for _, m, _ in points]})


def _verify_2d(L: LocalSystem, singular: dict):
    K = L.base
    for (v,) in K.simplices[0]:
        if (v,) in K.boundary:
            continue
        M = loop_monodromy(L, v)
        want = focus_focus(singular[v]) if v in singular else ExactMatrix.identity(2)
        if M != want:
            raise ModelError(f"monodromy around vertex {v} is {M.tolist()}, expected {want.tolist()}")


def build_focus_focus() -> Model:
    """One focus-focus point with invariant direction e1 in a 6x6 grid."""
    return focus_focus_disc([((3, 3), (1, 0), (-1, 0))], 6, 6, "focus-focus")


def build_torsion_pair(dir1, dir2) -> Model:
    """Two focus-focus points with independent, non-spanning invariant directions."""
    d = _cross(dir1, dir2)
    for v in (dir1, dir2):
        if gcd(*v) != 1:
            raise ValueError(f"direction {v} is not primitive")
    if d == 0:
        raise ValueError("directions are parallel")
    if abs(d) == 1:
        raise ValueError("directions span Z^2; the groups would be zero")
    return focus_focus_disc([((2, 2), tuple(dir1), (-1, 0)), ((5, 2), tuple(dir2), (1, 0))],
                            7, 4, f"torsion:{dir1[0]},{dir1[1]}:{dir2[0]},{dir2[1]}")


def build_goggles(variant: str = "shared_line") -> Model:
    """Two focus-focus points with invariant direction e1 and the goggle cycle.

    ``shared_line``: both points on the line y=2 with slits pointing away from
    each other. ``parallel_lines``: the points sit on two parallel lines.
    """
    if variant == "shared_line":
        pts = [((2, 2), (1, 0), (-1, 0)), ((5, 2), (1, 0), (1, 0))]
        model = focus_focus_disc(pts, 7, 4, "goggles-shared")
        bridge = [(3, 2), (4, 2)]
    elif variant == "parallel_lines":
        pts = [((2, 2), (1, 0), (-1, 0)), ((5, 4), (1, 0), (1, 0))]
        model = focus_focus_disc(pts, 7, 6, "goggles-parallel")
        bridge = [(3, 3), (4, 3)]
    else:
        raise ValueError(f"unknown goggle variant {variant!r}")
    vid = model.info["vid"]
    cyc = goggle_cycle(model.system, vid[pts[0][0]], vid[pts[1][0]],
                       [vid[b] for b in bridge], pts[0][1])
    cyc.name = "goggle"
    model.cycles["goggle"] = cyc
    return model


def ring_edges(K: DeltaComplex, v: int) -> list[Simplex]:
    """Edges of the link of a vertex."""
    out = set()
    for c in K.top_cofaces((v,)):
        out.add(tuple(w for w in c if w != v))
    return sorted(out)


def goggle_cycle(L: LocalSystem, d1: int, d2: int, bridge: Sequence[int], m) -> TropicalCycle:
    """A 1-cycle supported on link(d1), link(d2) and a bridge path.

    Among the integral cycles on that support, we pick one whose first bridge
    edge carries the coefficient m, written in the anchor frame of that edge.
    """
    return lasso_cycle(L, [d1, d2], [bridge], [m])


def lasso_cycle(L: LocalSystem, centers: Sequence[int], paths: Sequence[Sequence[int]],
                coeffs: Sequence) -> TropicalCycle:
    """A 1-cycle on the links of ``centers`` joined by vertex paths.

    The first edge of each path is required to carry the matching coefficient
    (anchor frame), unless that coefficient is None. Goggles are the case of
    two centers and one bridge.
    """
    from .constructible_sheaf import pushforward_sheaf
    from .homology_engine import ChainComplexOfSheaf
    K = L.base
    edges = set()
    for d in centers:
        edges |= set(ring_edges(K, d))
    firsts = []
    for path in paths:
        pe = [tuple(sorted(e)) for e in zip(path, path[1:])]
        if not pe:
            raise ModelError("a path needs at least one edge")
        edges |= set(pe)
        firsts.append(pe[0])
    F = pushforward_sheaf(L, 1)
    support = set()
    for e in edges:
        support.update(faces_of(e))
    C = ChainComplexOfSheaf(K, F, None, support)
    Z = kernel_lattice(C.differential(1))
    rows, target = [], []
    for e, m in zip(firsts, coeffs):
        if m is None:
            continue
        o, r = C.blocks[1][e]
        want = F.lattice(e).coordinates(list(m))
        if want is None:
            raise ModelError(f"coefficient {list(m)} is not a section over {e}")
        rows += [[Z.basis.entries[o + k][j] for j in range(Z.rank)] for k in range(r)]
        target += want
    sol = solve_integer(ExactMatrix(rows, len(rows), Z.rank), target)
    if sol is None:
        raise ModelError("no cycle on this support has the requested coefficients")
    vec = Z.basis.apply(sol)
    cells = C.cells_from_chain(1, {i: v for i, v in enumerate(vec) if v})
    return TropicalCycle(1, 1, cells)


# ---------------------------------------------------------------- affine charts

def cell_chart(model: Model, c: Simplex) -> dict:
    """Integer chart coordinates of the vertices of a top cell.

    Grid models use the global grid coordinates. Models glued from several
    charts store them per cell in ``info["charts"]``.
    """
    charts = model.info.get("charts")
    if charts is not None:
        return charts[c]
    K = model.complex
    return {v: K.coords[v] for v in c}


def verify_affine(model: Model) -> bool:
    """Transitions act on edge vectors of shared facets as the charts say."""
    K, L = model
    for f in K.simplices[K.n - 1]:
        cs = K.cofaces(f)
        if len(cs) != 2 or f in K.boundary:
            continue
        a, b = cs
        xa, xb = cell_chart(model, a), cell_chart(model, b)
        u0 = f[0]
        T = L.t(a, b)
        for u in f[1:]:
            va = [x - y for x, y in zip(xa[u], xa[u0])]
            vb = [x - y for x, y in zip(xb[u], xb[u0])]
            if T.apply(va) != vb:
                raise ModelError(f"charts of {a} and {b} disagree along {f}")
    return True


def orient_from_charts(model: Model) -> dict:
    """Orientation of top cells from their chart determinants (checked coherent)."""
    K, L = model
    ref = {}
    for c in K.top:
        x = cell_chart(model, c)
        rows = [[x[v][k] - x[c[0]][k] for k in range(K.n)] for v in c[1:]]
        from .exact_algebra import bareiss_det
        d = bareiss_det(rows)
        if d == 0:
            raise ModelError(f"cell {c} is degenerate in its chart")
        ref[c] = 1 if d > 0 else -1
    K.orientation = None
    o = K.orient({K.top[0]: ref[K.top[0]]})
    if any(o[c] != ref[c] for c in K.top):
        raise ModelError("chart orientations are not coherent")
    return o


def build_flat_torus(W: int = 4, H: int = 4) -> Model:
    """Singularity-free torus glued from a W x H grid (trivial local system)."""
    if W < 3 or H < 3:
        raise ValueError("torus grid needs at least 3 x 3 squares")

    def vid(x, y):
        return (x % W) * H + (y % H)
    tris, charts = [], {}
    for x in range(W):
        for y in range(H):
            for pts in (((x, y), (x + 1, y), (x + 1, y + 1)), ((x, y), (x + 1, y + 1), (x, y + 1))):
                c = tuple(sorted(vid(*p) for p in pts))
                tris.append(c)
                charts[c] = {vid(*p): p for p in pts}
    K = DeltaComplex(tris, 2)
    L = LocalSystem(K, 2)
    model = Model(f"torus-{W}x{H}", K, L, info={"charts": charts})
    orient_from_charts(model)
    model.cycles["horizontal"] = _grid_loop([vid(x, 0) for x in range(W)], [1, 0], "horizontal")
    model.cycles["vertical"] = _grid_loop([vid(0, y) for y in range(H)], [0, 1], "vertical")
    return model


def _grid_loop(verts: Sequence[int], coeff, name: str) -> TropicalCycle:
    """Closed edge loop through ``verts`` carrying ``coeff`` in the direction of travel."""
    cells = {}
    for a, b in zip(verts, list(verts[1:]) + [verts[0]]):
        e = (min(a, b), max(a, b))
        sg = 1 if a < b else -1
        cells[e] = [sg * x for x in coeff]
    return TropicalCycle(1, 1, cells, name)


# ---------------------------------------------------------------- perturbation

def _develop(model: Model, region: list[Simplex], root: Simplex):
    """Place the vertices of a Δ-free region in the gauge frame of ``root``.

    Returns (pos, P) with P[c] taking root gauge coordinates to those of c.
    """
    from fractions import Fraction
    K, L = model
    rs = set(region)
    P = {root: ExactMatrix.identity(K.n)}
    Pinv = {root: ExactMatrix.identity(K.n)}
    pos = {}

    def local(c):
        x = cell_chart(model, c)
        gi = L._ginv[c]
        return {v: gi.apply(list(x[v])) for v in c}
    y = local(root)
    for v in root:
        pos[v] = [Fraction(t) for t in y[v]]
    queue = [root]
    while queue:
        c = queue.pop(0)
        for i in range(len(c)):
            f = c[:i] + c[i + 1:]
            if f in K.boundary:
                continue
            for c2 in K.cofaces(f):
                if c2 == c or c2 not in rs:
                    continue
                D = L.D(c, c2)
                if c2 in P:
                    if P[c2] != D @ P[c]:
                        raise ModelError("region around the edge has monodromy")
                    continue
                P[c2] = D @ P[c]
                Pinv[c2] = Pinv[c] @ L.D(c2, c)
                y2 = local(c2)
                u0 = f[0]
                for v in c2:
                    delta = Pinv[c2].apply([a - b for a, b in zip(y2[v], y2[u0])])
                    place = [pos[u0][k] + delta[k] for k in range(K.n)]
                    if v in pos:
                        if pos[v] != place:
                            raise ModelError("development of the region is inconsistent")
                    else:
                        pos[v] = place
                queue.append(c2)
    return pos, P, Pinv


def perturbed_intersection_points(model: Model, V: TropicalCycle, W: TropicalCycle,
                                  shift=None) -> list:
    """Transverse intersection data of V with a small displaced copy of W (n = 2).

    Each vertex u of W moves by ``shift`` written in the chart of the anchor cell
    of u. Every displaced edge stays near the original, so it can only meet edges
    of V that share a vertex with it. The closed stars of its two ends form a
    region without singular points, and the computation runs in that region's
    developed chart.
    """
    from fractions import Fraction
    from .pairing_intersection import IntersectionPoint
    K, L = model
    if K.n != 2 or V.q != 1 or W.q != 1:
        raise ModelError("perturbed intersections are implemented for curves on surfaces")
    if shift is None:
        shift = (Fraction(1, 10), Fraction(1, 7))
    shift = [Fraction(s) for s in shift]
    pts = []
    for e2, zeta in sorted(W.cells.items()):
        v, w = e2
        region = sorted(set(K.top_cofaces((v,))) | set(K.top_cofaces((w,))))
        root = L.anchor(e2)
        pos, P, Pinv = _develop(model, region, root)

        def disp(u):
            a = L.anchor((u,))
            h = L._ginv[a].apply(shift)
            return [pos[u][k] + Pinv[a].apply(h)[k] for k in range(2)]

        A2, B2 = disp(v), disp(w)
        zeta_root = list(zeta)
        for e1, xi in sorted(V.cells.items()):
            a, b = e1
            if a not in pos or b not in pos or not set(e1) & set(e2):
                continue
            c = next(cc for cc in K.top_cofaces(e1) if cc in P)
            xi_c = L.star_transport(e1, L.anchor(e1), c).apply(list(xi))
            xi_root = Pinv[c].apply(xi_c)
            A1, B1 = pos[a], pos[b]
            d1 = [B1[k] - A1[k] for k in range(2)]
            d2 = [B2[k] - A2[k] for k in range(2)]
            den = d1[0] * d2[1] - d1[1] * d2[0]
            r = [A2[k] - A1[k] for k in range(2)]
            if den == 0:
                if r[0] * d1[1] - r[1] * d1[0] == 0:
                    raise ModelError("displaced edge overlaps an edge of V; choose another shift")
                continue
            s = (r[0] * d2[1] - r[1] * d2[0]) / den
            t = (r[0] * d1[1] - r[1] * d1[0]) / den
            if 0 < s < 1 and 0 < t < 1:
                pts.append(IntersectionPoint([d1], [d2], xi_root, zeta_root, f"{e1}x{e2}"))
            elif 0 <= s <= 1 and 0 <= t <= 1:
                raise ModelError("intersection at a vertex; choose another shift")
    return pts


# ---------------------------------------------------------------- symple models

from .symple import (  # noqa: E402
    IntervalFactor, LatticePolygon, LatticeSimplex, SympleError, SympleModelSpec,
    codim2_ring, product_complex,
)


class SympleModel(Model):
    """Product model with chamber labels; provides the data behind the sheaf S."""

    def __init__(self, spec: SympleModelSpec, K, L, factors, verts, proj):
        super().__init__(spec.label(), K, L, info={"spec": spec})
        self.spec = spec
        self.factors = factors
        self.vertex_parts = verts
        self.proj = proj

    def part(self, s: Simplex, k: int) -> tuple:
        return tuple(sorted({self.vertex_parts[v][k] for v in s}))

    def x_chamber(self, c: Simplex) -> int:
        return self.factors[0].tops[self.proj[c][0]]

    def y_chamber(self, c: Simplex) -> int:
        return self.factors[1].tops[self.proj[c][1]]

    def cotriangle_face(self, s: Simplex) -> tuple:
        """Vertices of the dual-polytope face attached to the stratum of s in the second factor."""
        return tuple(sorted(self.factors[1].chambers(self.part(s, 1))))

    def triangle_face(self, s: Simplex) -> tuple:
        return tuple(sorted(self.factors[0].chambers(self.part(s, 0))))

    def tangent_basis(self, face: Sequence[int]) -> list:
        """Integer basis of the tangent lattice of a face of the dual polytope."""
        w = self.spec.cotriangle.vertices
        diffs = [[w[f][k] - w[face[0]][k] for k in range(self.spec.b)] for f in face[1:]]
        basis = []
        for d in diffs:
            if rational_rank(basis + [d]) > len(basis):
                basis.append(d)
        return basis

    def tangent_restriction(self, face: Sequence[int], smaller: Sequence[int]) -> ExactMatrix:
        """Hom(T_face) → Hom(T_smaller), as a matrix in the dual bases."""
        big, small = self.tangent_basis(face), self.tangent_basis(smaller)
        if not small:
            return ExactMatrix.zeros(0, len(big))
        A = ExactMatrix.from_columns(big, self.spec.b)
        rows = []
        for u in small:
            x = solve_integer(A, u)
            if x is None:
                raise ModelError("tangent lattice of a face is not a sublattice")
            rows.append(x)
        return ExactMatrix(rows, len(small), len(big))


def build_symple_model(spec: SympleModelSpec, fineness: int = 0) -> SympleModel:
    """Triangulated ball realizing the symple model of a polytope pair.

    ``fineness`` counts barycentric subdivisions applied after verification.
    """
    factors = [spec.triangle.fan(), spec.cotriangle.fan()] + [IntervalFactor() for _ in range(spec.c)]
    tops, verts, proj = product_complex(factors)
    coords = [tuple(x for k, f in enumerate(factors) for x in f.coords[v[k]]) for v in verts]
    K0 = DeltaComplex(tops, spec.n, coords=coords)
    X, Y = factors[0], factors[1]
    delta = [s for s in K0.all_simplices()
             if X.in_wall({verts[v][0] for v in s}) and Y.in_wall({verts[v][1] for v in s})]
    boundary = [f for f in K0.simplices[spec.n - 1] if len(K0.cofaces(f)) == 1]
    K = DeltaComplex(tops, spec.n, delta=delta, boundary=boundary, coords=coords)
    K.orient()
    model = SympleModel(spec, K, None, factors, verts, proj)
    trans = {}
    for _, c1, c2 in dual_graph_edges(K):
        i1, i2 = model.x_chamber(c1), model.x_chamber(c2)
        k1, k2 = model.y_chamber(c1), model.y_chamber(c2)
        if i1 != i2:
            if k1 != k2:
                raise ModelError(f"cells {c1}, {c2} differ in both chambers")
            trans[(c1, c2)] = spec.shear(i1, i2, k1)
    model.system = LocalSystem(K, spec.n, trans)
    verify_symple(model)
    if fineness:
        model = _refine(model, fineness)
    return model


def dual_graph_edges(K: DeltaComplex):
    from .simplicial_complex import dual_graph
    return dual_graph(K).edges


def verify_symple(model: SympleModel) -> int:
    """Check every interior codim-2 loop: identity off Δ, the stratum transvection on Δ.

    Returns the number of loops checked.
    """
    K, L = model.complex, model.system
    spec = model.spec
    ident = ExactMatrix.identity(spec.n)
    checked = 0
    for s in K.simplices[K.n - 2]:
        if s in K.boundary:
            continue
        ring = codim2_ring(K, s)
        if ring is None:
            raise ModelError(f"no cyclic ring of cells around {s}")
        M = transport(L, ring + ring[:1])
        xs = sorted({model.x_chamber(c) for c in ring})
        ys = sorted({model.y_chamber(c) for c in ring})
        if s in K.delta:
            if len(xs) != 2 or len(ys) != 2:
                raise ModelError(f"discriminant simplex {s} does not sit on a wall pair")
            T = spec.transvection(xs[0], xs[1], ys[0], ys[1])
            if M != T and M != inverse_unimodular(T):
                raise ModelError(f"monodromy around {s} is {M.tolist()}, expected {T.tolist()}")
        elif M != ident:
            raise ModelError(f"nontrivial monodromy around the regular simplex {s}")
        checked += 1
    return checked


def _refine(model: SympleModel, times: int) -> SympleModel:
    from .homology_engine import subdivide_system
    L = model.system
    K0 = model.complex
    carrier_total = {c: c for c in K0.top}
    for _ in range(times):
        L, carrier = subdivide_system(L)
        carrier_total = {c: carrier_total[carrier[c]] for c in L.base.top}
    out = SympleModel(model.spec, L.base, L, model.factors, None, None)
    out.name = f"{model.name}/b{times}"
    out.info["carrier"] = carrier_total
    out.info["coarse"] = model
    return out


from .punctured import (  # noqa: E402
    PuncturedError, complex_CD_machinery, origin_vertex, prop_2_12_prediction,
    punctured_cech_S, punctured_complement, punctured_h1, punctured_link,
    theorem_h1_check, threefold_vertex_cech,
)


def build_conifold(fineness: int = 1) -> SympleModel:
    """Unit square against a unit interval: a four-valent discriminant vertex.

    One barycentric subdivision makes the closed-kind homology correct (the
    coarse star of the vertex is the whole ball).
    """
    square = LatticePolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    model = build_symple_model(SympleModelSpec(square, LatticeSimplex.interval()), fineness)
    model.name = "conifold" + (f"/b{fineness}" if fineness else "")
    return model


# ---------------------------------------------------------------- cube K3

_FAN = ((1, 0), (0, 1), (-1, -1))


def _face_frame(k: int, side: int, N: int) -> tuple:
    """Integer frame (a, b) of the face x_k = side with a × b the outward normal."""
    a, b = [0, 0, 0], [0, 0, 0]
    a[(k + 1) % 3] = 1
    b[(k + 2) % 3] = 1
    return (tuple(a), tuple(b)) if side == N else (tuple(b), tuple(a))


def _corner_fan(P, k: int, N: int) -> ExactMatrix:
    """Linear part of the corner fan chart at P on the face with normal axis k.

    The three cube edges leaving P go to the rays of the fan of P^2.
    """
    a, b = _face_frame(k, P[k], N)

    def img(vec):
        x = [0, 0]
        for i in range(3):
            if vec[i]:
                sg = vec[i] if P[i] == 0 else -vec[i]
                x = [x[0] + sg * _FAN[i][0], x[1] + sg * _FAN[i][1]]
        return x
    A, B = img(a), img(b)
    return ExactMatrix([[A[0], B[0]], [A[1], B[1]]], 2, 2)


def _cube_face(pts) -> tuple:
    """(axis, side) of the cube face containing all points."""
    for k in range(3):
        if len({p[k] for p in pts}) == 1:
            return k, pts[0][k]
    raise ModelError("triangle is not contained in a face")


def build_cube_k3(N: int = 7, delta_at: tuple = (2, 5)) -> Model:
    """Boundary of the cube [0,N]^3 with 24 focus-focus points.

    Faces carry their integer coordinates and each corner carries the fan chart
    of P^2. Across a cube edge the gluing is the one of the nearer corner. On the
    middle stretch it is that gluing composed with one transvection fixing the
    edge direction. The two corner gluings differ by the square of such a
    transvection, so every edge carries two focus-focus points (at distances
    ``delta_at`` from its first corner) with invariant direction along the edge.
    """
    lo, hi = delta_at
    if not (1 <= lo and lo + 2 < hi <= N - 1):
        raise ValueError("singular points need room: 1 <= lo, lo + 2 < hi <= N - 1")
    pts = sorted(p for p in ((x, y, z) for x in range(N + 1) for y in range(N + 1)
                             for z in range(N + 1)) if 0 in p or N in p)
    vid = {p: i for i, p in enumerate(pts)}
    tris, charts, face_of = [], {}, {}
    for k in range(3):
        for side in (0, N):
            a, b = _face_frame(k, side, N)
            for u in range(N):
                for w in range(N):
                    def pt(du, dw):
                        p = [0, 0, 0]
                        p[k] = side
                        i, j = [t for t in range(3) if t != k]
                        p[i], p[j] = u + du, w + dw
                        return tuple(p)
                    for tri in ((pt(0, 0), pt(1, 0), pt(1, 1)), (pt(0, 0), pt(1, 1), pt(0, 1))):
                        c = tuple(sorted(vid[p] for p in tri))
                        tris.append(c)
                        face_of[c] = (k, side)
                        charts[c] = {vid[p]: (sum(x * y for x, y in zip(p, a)),
                                              sum(x * y for x, y in zip(p, b))) for p in tri}
    K = DeltaComplex(tris, 2)
    trans = {}
    for e in K.simplices[1]:
        c1, c2 = K.cofaces(e)
        (kA, sA), (kB, sB) = face_of[c1], face_of[c2]
        if (kA, sA) == (kB, sB):
            continue
        p, q = pts[e[0]], pts[e[1]]
        ax = next(t for t in range(3) if p[t] != q[t])
        P0 = list(p)
        P0[ax] = 0
        P1 = list(p)
        P1[ax] = N
        GP = inverse_unimodular(_corner_fan(P0, kB, N)) @ _corner_fan(P0, kA, N)
        GQ = inverse_unimodular(_corner_fan(P1, kB, N)) @ _corner_fan(P1, kA, N)
        start = min(p[ax], q[ax])
        if start < lo:
            G = GP
        elif start >= hi:
            G = GQ
        else:
            # GP = GQ X^2 with X a transvection along the edge; take the midpoint
            D = inverse_unimodular(GQ) @ GP
            half = D.entries
            X = ExactMatrix([[1, half[0][1] // 2], [half[1][0] // 2, 1]], 2, 2)
            if X @ X != D:
                raise ModelError("corner gluings do not differ by a square transvection")
            G = GQ @ X
        trans[(c1, c2)] = G
    delta, directions = [], {}
    for ax in range(3):
        others = [t for t in range(3) if t != ax]
        for s1 in (0, N):
            for s2 in (0, N):
                for h in (lo, hi):
                    p = [0, 0, 0]
                    p[ax], p[others[0]], p[others[1]] = h, s1, s2
                    delta.append((vid[tuple(p)],))
                    d = [0, 0, 0]
                    d[ax] = 1
                    directions[vid[tuple(p)]] = tuple(d)
    K = K.with_flags(delta=sorted(delta))
    L = LocalSystem(K, 2, trans)
    model = Model(f"cube-k3-{N}", K, L, info={
        "vid": vid, "points": pts, "charts": charts, "face_of": face_of,
        "directions": directions, "delta_at": (lo, hi), "N": N})
    verify_affine(model)
    orient_from_charts(model)
    _verify_cube(model)
    families = cube_cycle_families(model)
    model.info["families"] = families
    model.cycles = {name: families[name] for name in CUBE_BASIS}
    return model


def _edge_direction(model: Model, v: int, c: Simplex) -> tuple:
    k, side = model.info["face_of"][c]
    a, b = _face_frame(k, side, model.info["N"])
    d = model.info["directions"][v]
    return (sum(x * y for x, y in zip(d, a)), sum(x * y for x, y in zip(d, b)))


def oriented_ring(model: Model, v: int) -> list[Simplex]:
    """Cells around a vertex of a closed chart-oriented surface, counter-clockwise."""
    K = model.complex
    ring = codim2_ring(K, (v,))
    if ring is None:
        raise ModelError(f"vertex {v} has no cyclic ring")
    c0, c1 = ring[0], ring[1]
    w = next(x for x in c0 if x != v and x in c1)
    u = next(x for x in c0 if x != v and x != w)
    x = cell_chart(model, c0)
    if _cross([p - q for p, q in zip(x[u], x[v])], [p - q for p, q in zip(x[w], x[v])]) < 0:
        ring = [ring[0]] + ring[1:][::-1]
    return ring


def _verify_cube(model: Model) -> None:
    """Identity monodromy at smooth vertices; T_m clockwise at each singular point."""
    K, L = model
    for (v,) in K.simplices[0]:
        ring = oriented_ring(model, v)[::-1]
        M = transport(L, ring + [ring[0]])
        if v in model.info["directions"]:
            want = focus_focus(_edge_direction(model, v, ring[0]))
        else:
            want = ExactMatrix.identity(2)
        if M != want:
            raise ModelError(f"monodromy around vertex {v} is {M.tolist()}, expected {want.tolist()}")


def loop_cycle(L: LocalSystem, verts: Sequence[int], vec, name: str = "") -> TropicalCycle:
    """Closed edge loop carrying the parallel transport of ``vec``.

    ``vec`` is written in the gauge frame of the anchor of the first edge and
    is moved from edge to edge through the star of their common vertex. The
    loop must avoid Δ and the transported vector must come back unchanged.
    """
    verts = list(verts)
    K = L.base
    if any((v,) in K.delta for v in verts):
        raise ModelError("loop passes through a singular point")
    steps = list(zip(verts, verts[1:] + verts[:1]))
    edges = [(min(a, b), max(a, b)) for a, b in steps]
    cells = {}
    cur = list(vec)
    for i, ((a, b), e) in enumerate(zip(steps, edges)):
        if i:
            prev = edges[i - 1]
            cur = L.star_transport((a,), L.anchor(prev), L.anchor(e)).apply(cur)
        cells[e] = [x if a < b else -x for x in cur]
    back = L.star_transport((verts[0],), L.anchor(edges[-1]), L.anchor(edges[0])).apply(cur)
    if back != list(vec):
        raise ModelError("coefficient is not invariant under the loop's monodromy")
    return TropicalCycle(1, 1, cells, name)


def chart_vector(model: Model, c: Simplex, vec) -> list:
    """A chart vector of cell c in the gauge frame of c."""
    return model.system._ginv[c].apply(list(vec))


_AXES = "xyz"

# Lattice basis of H_1 found once by a greedy exchange search over the families
# below (equators first, then goggles, then tripods).
CUBE_BASIS = (
    "equator-x", "equator-y", "equator-z", "belt-x", "belt-y", "belt-z",
    "goggle-x-0-0", "goggle-x-0-N", "goggle-x-N-0", "goggle-x-N-N",
    "goggle-y-0-0", "goggle-y-0-N", "goggle-y-across-z0-lo", "goggle-z-0-0",
    "goggle-z-across-x0-lo", "goggle-z-across-y0-lo", "goggle-x-across-y0-lo",
    "goggle-y-across-x0-lo", "goggle-x-across-z0-lo", "tripod-0-0-0",
)


def _face_vector(model: Model, c: Simplex, v3) -> list:
    """A 3d vector tangent to the face of c, in the gauge frame of c."""
    k, side = model.info["face_of"][c]
    a, b = _face_frame(k, side, model.info["N"])
    return chart_vector(model, c, (sum(x * y for x, y in zip(v3, a)),
                                   sum(x * y for x, y in zip(v3, b))))


def cube_cycle_families(model: Model) -> dict:
    """Named goggles, equators, belts and corner tripods on the cube model.

    * ``goggle-<a>-<s>-<t>``: the two points on one edge along axis a, the
      other coordinates being s, t in {0, N}; the bridge runs along the edge.
    * ``goggle-<a>-across-<b><s>-<lo|hi>``: points on opposite edges of the
      face x_b = s, joined straight across the face.
    * ``equator-<a>``: loop at mid height around axis a carrying its tangent.
    * ``belt-<a>``: loop at height 1 around axis a carrying the axis direction.
    * ``tripod-<corner>``: three legs from a corner to the nearest points,
      closed by lassos; the leg directions sum to zero in the corner chart.
    """
    K, L = model
    N, vid = model.info["N"], model.info["vid"]
    lo, hi = model.info["delta_at"]
    out = {}

    def tag(x):
        return "0" if x == 0 else "N"

    def at(ax, h, rest):
        p = [0, 0, 0]
        o = [t for t in range(3) if t != ax]
        p[ax], p[o[0]], p[o[1]] = h, rest[0], rest[1]
        return vid[tuple(p)]

    for ax in range(3):
        d = [0, 0, 0]
        d[ax] = 1
        o = [t for t in range(3) if t != ax]
        for s1 in (0, N):
            for s2 in (0, N):
                br = [at(ax, h, (s1, s2)) for h in range(lo + 1, hi)]
                a = L.anchor(tuple(sorted(br[:2])))
                cyc = goggle_cycle(L, at(ax, lo, (s1, s2)), at(ax, hi, (s1, s2)), br,
                                   _face_vector(model, a, d))
                cyc.name = f"goggle-{_AXES[ax]}-{tag(s1)}-{tag(s2)}"
                out[cyc.name] = cyc
        for j in range(2):
            kn, other = o[j], o[1 - j]
            for sv in (0, N):
                for h, hname in ((lo, "lo"), (hi, "hi")):
                    def P(w):
                        p = [0, 0, 0]
                        p[ax], p[kn], p[other] = h, sv, w
                        return vid[tuple(p)]
                    br = [P(w) for w in range(1, N)]
                    a = L.anchor(tuple(sorted(br[:2])))
                    cyc = goggle_cycle(L, P(0), P(N), br, _face_vector(model, a, d))
                    cyc.name = f"goggle-{_AXES[ax]}-across-{_AXES[kn]}{tag(sv)}-{hname}"
                    out[cyc.name] = cyc
        ring = ([(u, 0) for u in range(N)] + [(N, u) for u in range(N)]
                + [(N - u, N) for u in range(N)] + [(0, N - u) for u in range(N)])
        for h, kind in (((lo + hi) // 2, "equator"), (1, "belt")):
            verts = [at(ax, h, r) for r in ring]
            a = L.anchor(tuple(sorted(verts[:2])))
            if kind == "equator":
                x = cell_chart(model, a)
                vec = chart_vector(model, a, [x[verts[1]][k] - x[verts[0]][k] for k in range(2)])
            else:
                vec = _face_vector(model, a, d)
            name = f"{kind}-{_AXES[ax]}"
            out[name] = loop_cycle(L, verts, vec, name)
    for corner in product((0, N), repeat=3):
        cv = vid[corner]
        centers, paths, coeffs = [], [], []
        for ax in range(3):
            sg = 1 if corner[ax] == 0 else -1
            q, dd = list(corner), list(corner)
            q[ax] += sg
            dd[ax] += sg * lo
            centers.append(vid[tuple(dd)])
            paths.append([cv, vid[tuple(q)]])
            # outward direction on the leg oriented away from the corner
            d = [0, 0, 0]
            d[ax] = sg if cv < paths[-1][1] else -sg
            a = L.anchor(tuple(sorted(paths[-1])))
            coeffs.append(_face_vector(model, a, d))
        cyc = lasso_cycle(L, centers, paths, coeffs)
        cyc.name = "tripod-" + "-".join(tag(x) for x in corner)
        out[cyc.name] = cyc
    return out


def regauge_cycle(cycle: TropicalCycle, old: LocalSystem, new: LocalSystem) -> TropicalCycle:
    """Rewrite a cycle's coefficients from the gauge of ``old`` to that of ``new``."""
    if old.base is not new.base:
        raise ModelError("local systems live on different complexes")
    cells = {}
    for s, v in cycle.cells.items():
        a = old.anchor(s)
        M = new.wedge(new._ginv[a] @ old._g[a], cycle.p)
        cells[s] = M.apply(list(v))
    return TropicalCycle(cycle.p, cycle.q, cells, cycle.name)
