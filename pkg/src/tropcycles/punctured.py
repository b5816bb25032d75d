"""Cohomology of punctured neighbourhoods of discriminant points.

The neighbourhood U of a vertex p is its closed star. Because the star is a cone,
U minus p retracts onto the link with all strata and transitions intact. So
H^*(U∖p, ι_*Λ) is the vertex-star Čech cohomology of the link. The complement
of the open star gives the same answer for the whole model and is kept as a
cross-check.

The combinatorial side covers (Y×Y̌)∖0 by the open stars of face pairs. It
includes the tangent-space complexes C and D of the polytopes and their duals,
plus the three-chart matrix at a trivalent vertex.
"""

from __future__ import annotations

from itertools import combinations

from .cech_cohomology import vertex_star_cech
from .constructible_sheaf import SheafFunctor
from .exact_algebra import ExactMatrix, block_diag, rational_rank
from .homology_engine import GradedComplex, SparseMatrix, homology
from .local_system import LocalSystem, star_monodromy, invariant_lattice
from .simplicial_complex import DeltaComplex, Simplex, boundary_sign


class PuncturedError(ValueError):
    pass


# ---------------------------------------------------------------- geometric side

def _restrict(L: LocalSystem, tops: list, rename, n: int, delta) -> tuple[DeltaComplex, LocalSystem]:
    K = L.base
    new_tops = {c: rename(c) for c in tops}
    verts = sorted({v for t in new_tops.values() for v in t})
    vid = {v: i for i, v in enumerate(verts)}

    def relabel(s):
        return tuple(sorted(vid[v] for v in s))
    cells = [relabel(t) for t in new_tops.values()]
    K0 = DeltaComplex(cells, n)
    bd = [f for f in K0.simplices[n - 1] if len(K0.cofaces(f)) == 1]
    dl = [relabel(s) for s in delta if all(v in vid for v in s)]
    K1 = DeltaComplex(cells, n, delta=dl, boundary=bd)
    back = {relabel(new_tops[c]): c for c in tops}
    trans = {}
    for f in K1.simplices[n - 1]:
        cs = K1.cofaces(f)
        if len(cs) == 2:
            a, b = cs
            M = L.t(back[a], back[b])
            if M != L._ident:
                trans[(a, b)] = M
    return K1, LocalSystem(K1, L.rank, trans)


def punctured_link(L: LocalSystem, p: int) -> tuple[DeltaComplex, LocalSystem]:
    """The link of vertex p with the restricted local system and discriminant."""
    K = L.base
    if (p,) in K.boundary:
        raise PuncturedError("p lies on the boundary")
    tops = K.top_cofaces((p,))
    delta = [tuple(v for v in s if v != p) for s in K.delta if p in s and len(s) > 1]
    return _restrict(L, tops, lambda c: tuple(v for v in c if v != p), K.n - 1, delta)


def punctured_complement(L: LocalSystem, p: int) -> tuple[DeltaComplex, LocalSystem]:
    """The model minus the open star of p."""
    K = L.base
    tops = [c for c in K.top if p not in c]
    delta = [s for s in K.delta if p not in s]
    return _restrict(L, tops, lambda c: c, K.n, delta)


def punctured_h1(L: LocalSystem, p: int, field: str = "Q", via: str = "link", wedge: int = 1) -> int:
    """Rank of H^1(U∖p, ι_*∧^wedge Λ)."""
    Kp, Lp = (punctured_link if via == "link" else punctured_complement)(L, p)
    C = vertex_star_cech(Kp, SheafFunctor(Lp, wedge, "open"))
    return homology(C, field, degrees=[1], representatives=False)[0].betti


def interior_delta_vertices(K: DeltaComplex) -> list[int]:
    return [v for (v,) in K.simplices[0] if (v,) in K.delta and (v,) not in K.boundary]


def theorem_h1_check(model, field: str = "Q") -> dict:
    """H^1(U∖p, ι_*Λ_Q) at every interior discriminant vertex of a model."""
    K, L = model.complex, model.system
    rows = {p: punctured_h1(L, p, field) for p in interior_delta_vertices(K)}
    return {"ok": bool(rows) and all(r == 0 for r in rows.values()), "rows": rows}


# ---------------------------------------------------------------- C, D complexes

def _faces(N: int, dim: int) -> list[tuple]:
    return list(combinations(range(N), dim + 1))


def _tangent_basis(P, face) -> list[list[int]]:
    vs = P.vertices
    return [[vs[f][k] - vs[face[0]][k] for k in range(len(vs[0]))] for f in face[1:]]


def _coords_in(basis_big, vec) -> list:
    from .exact_algebra import solve_integer
    A = ExactMatrix.from_columns(basis_big, len(vec))
    x = solve_integer(A, vec)
    if x is None:
        raise PuncturedError("tangent vector outside the face lattice")
    return x


def _inclusion(P, small, big) -> ExactMatrix:
    """T_small → T_big in the difference bases."""
    bb = _tangent_basis(P, big)
    cols = [_coords_in(bb, u) for u in _tangent_basis(P, small)]
    return ExactMatrix.from_columns(cols, len(bb)) if cols else ExactMatrix.zeros(len(bb), 0)


def _cochain_complex(blocks_by_deg: dict, maps) -> GradedComplex:
    """Assemble a cochain complex from per-degree keyed blocks and block maps."""
    degs = sorted(blocks_by_deg)
    offs, dims = {}, []
    for d in degs:
        o, tot = {}, 0
        for key, r in blocks_by_deg[d]:
            o[key] = (tot, r)
            tot += r
        offs[d] = o
        dims.append(tot)
    dmaps = {}
    for d in degs[:-1]:
        M = SparseMatrix(dims[d + 1], dims[d])
        for key, (c0, r) in offs[d].items():
            for key2, (r0, r2) in offs[d + 1].items():
                B = maps(key, key2)
                if B is None:
                    continue
                for i in range(r2):
                    for j in range(r):
                        if B.entries[i][j]:
                            M.add(r0 + i, c0 + j, B.entries[i][j])
        dmaps[d] = M
    return GradedComplex(dims, dmaps, cochain=True)


def complex_C(P) -> GradedComplex:
    """C^i = ⊕_{dim τ = i} T_τ with signed inclusions."""
    N = len(P.vertices)
    d = N - 1
    blocks = {i: [(f, i) for f in _faces(N, i)] for i in range(d + 1)}

    def maps(s, t):
        if not set(s) <= set(t):
            return None
        return _inclusion(P, s, t).scale(boundary_sign(t, s))
    return _cochain_complex(blocks, maps)


def complex_D(P) -> GradedComplex:
    """D^i = ⊕_{dim τ = i} Q, the simplicial cochains of the simplex."""
    N = len(P.vertices)
    blocks = {i: [(f, 1) for f in _faces(N, i)] for i in range(N)}

    def maps(s, t):
        if not set(s) <= set(t):
            return None
        return ExactMatrix([[boundary_sign(t, s)]], 1, 1)
    return _cochain_complex(blocks, maps)


def dual_complex(C: GradedComplex, top: int, truncate_top: bool = False) -> GradedComplex:
    """Ĉ^i = Hom(C^{top-i}); with ``truncate_top`` the term Ĉ^top is zero."""
    dims = [C.dims[top - i] for i in range(top + 1)]
    if truncate_top:
        dims[top] = 0
    d = {}
    for i in range(top):
        if dims[i + 1] == 0 or dims[i] == 0:
            d[i] = SparseMatrix(dims[i + 1], dims[i])
            continue
        src = C.d[top - i - 1]  # C^{top-i-1} -> C^{top-i}
        M = SparseMatrix(dims[i + 1], dims[i])
        for (r, c), v in _entries(src):
            M.add(c, r, v)
        d[i] = M
    return GradedComplex(dims, d, cochain=True)


def tensor_complex(A: GradedComplex, B: GradedComplex) -> GradedComplex:
    """Total complex of A ⊗ B with the Koszul sign on the second factor."""
    degs = range(len(A.dims) + len(B.dims) - 1)
    offs = {}
    dims = []
    for k in degs:
        o, tot = {}, 0
        for i in range(len(A.dims)):
            j = k - i
            if 0 <= j < len(B.dims):
                o[(i, j)] = tot
                tot += A.dims[i] * B.dims[j]
        offs[k] = o
        dims.append(tot)
    d = {}
    for k in list(degs)[:-1]:
        M = SparseMatrix(dims[k + 1], dims[k])
        for (i, j), o in offs[k].items():
            nb = B.dims[j]
            if i in A.d and (i + 1, j) in offs[k + 1]:
                o2 = offs[k + 1][(i + 1, j)]
                for (r, c), v in _entries(A.d[i]):
                    for y in range(nb):
                        M.add(o2 + r * nb + y, o + c * nb + y, v)
            if j in B.d and (i, j + 1) in offs[k + 1]:
                o2 = offs[k + 1][(i, j + 1)]
                nb2 = B.dims[j + 1]
                sg = -1 if i % 2 else 1
                for (r, c), v in _entries(B.d[j]):
                    for x in range(A.dims[i]):
                        M.add(o2 + x * nb2 + r, o + x * nb + c, sg * v)
        d[k] = M
    return GradedComplex(dims, d, cochain=True)


def _entries(S: SparseMatrix):
    for j, col in S.cols.items():
        for i, v in col.items():
            yield (i, j), v


def _ranks(C: GradedComplex) -> list[int]:
    return [h.betti for h in homology(C, "Q", representatives=False)]


def complex_CD_machinery(triangle, cotriangle) -> dict:
    """Cohomology ranks of C (of the dual polytope), D (of the polytope), their duals and the tensor."""
    a, b = triangle.dim, cotriangle.dim
    C = complex_C(cotriangle)
    D = complex_D(triangle)
    Cd = dual_complex(C, b)
    Dd = dual_complex(D, a)
    Dbar = dual_complex(D, a, truncate_top=True)
    T = tensor_complex(Dbar, Cd)
    return {"C": _ranks(C), "D": _ranks(D), "C_dual": _ranks(Cd), "D_dual": _ranks(Dd),
            "D_bar": _ranks(Dbar), "tensor": _ranks(T), "tensor_dims": T.dims}


# ---------------------------------------------------------------- Čech complex of S

def punctured_cech_S(triangle, cotriangle) -> tuple[GradedComplex, list[int]]:
    """Čech complex of S on (Y×Y̌)∖0 for the cover by stars of face pairs.

    Cover sets are pairs (Δ, facet of Δ̌) and (facet of Δ, Δ̌). A set of them
    meets in the pair of face intersections, which is non-empty when both
    faces have positive dimension. Sections are Hom(T_τ̌, Q), restricted along
    the inclusion of tangent spaces.
    """
    Na, Nb = len(triangle.vertices), len(cotriangle.vertices)
    full_a, full_b = tuple(range(Na)), tuple(range(Nb))
    cover = [(full_a, f) for f in _faces(Nb, Nb - 2)] + [(f, full_b) for f in _faces(Na, Na - 2)]

    def meet(J):
        ta = set(full_a)
        tb = set(full_b)
        for j in J:
            ta &= set(cover[j][0])
            tb &= set(cover[j][1])
        return tuple(sorted(ta)), tuple(sorted(tb))
    blocks: dict = {}
    for k in range(len(cover)):
        for J in combinations(range(len(cover)), k + 1):
            ta, tb = meet(J)
            if len(ta) >= 2 and len(tb) >= 2:
                blocks.setdefault(k, []).append((J, len(tb) - 1))
    if not blocks:
        return GradedComplex([0], {}, cochain=True), [0]
    top = max(blocks)
    for k in range(top + 1):
        blocks.setdefault(k, [])
    sec = {J: meet(J)[1] for k in blocks for J, _ in blocks[k]}

    def maps(J, J2):
        if not set(J) <= set(J2):
            return None
        extra = next(iter(set(J2) - set(J)))
        sg = -1 if sorted(J2).index(extra) % 2 else 1
        R = _inclusion(cotriangle, sec[J2], sec[J]).T
        return R.scale(sg)
    C = _cochain_complex(blocks, maps)
    return C, _ranks(C)


def prop_2_12_prediction(a: int, b: int) -> list[int]:
    """Predicted ranks of H^k((Y×Y̌)∖0, S), padded to degree a+b-2."""
    out = [0] * max(a + b - 1, 1)
    if a + b >= 4:
        out[0] = b
        out[a + b - 3] += a
    elif a + b == 3:
        out[0] = a + b
    return out


# ---------------------------------------------------------------- threefold vertex

def threefold_vertex_cech(model) -> dict:
    """The three-chart computation at the trivalent vertex of a 3d symple model.

    The legs are the three discriminant rays through the origin. T_j is the
    monodromy around leg j, read at one base cell of the star. The reduced block
    is (id - T_1 | T_2 - id).
    """
    K, L = model.complex, model.system
    if K.n != 3:
        raise PuncturedError("the threefold computation needs a 3-dimensional model")
    p = origin_vertex(K)
    legs = sorted({e for e in K.delta if len(e) == 2 and p in e})
    if len(legs) != 3:
        raise PuncturedError(f"vertex {p} is not trivalent ({len(legs)} legs)")
    base = K.top_cofaces((p,))[0]
    Ts = []
    for e in legs:
        gens = star_monodromy(L, e)
        Tl = [g for g in gens if g != L._ident]
        if not Tl:
            raise PuncturedError(f"no monodromy around leg {e}")
        # move the loop to the common base cell through the star of p
        P = L.star_transport((p,), gens.base, base)
        Pi = L.star_transport((p,), base, gens.base)
        Ts.append(P @ Tl[0] @ Pi)
    I = ExactMatrix.identity(3)
    reduced = ExactMatrix([r1 + r2 for r1, r2 in zip((I - Ts[0]).entries, (Ts[1] - I).entries)], 3, 6)
    full = ExactMatrix([list(r) for r in
                        [a + b + c for a, b, c in zip(I.entries, (I.scale(-1)).entries, I.entries)] +
                        [a + b + c for a, b, c in zip(I.entries, Ts[0].scale(-1).entries, Ts[1].entries)]], 6, 9)
    ker_reduced = 6 - rational_rank(reduced.entries)
    ker_full = 9 - rational_rank(full.entries)
    inv = invariant_lattice(star_monodromy(L, (p,)), 1)
    a = inv.rank
    rank_d0 = 6 - a
    return {"vertex": p, "a": a, "kernel_reduced": ker_reduced, "kernel_full": ker_full,
            "rank_d0": rank_d0, "h1": ker_full - rank_d0}


def origin_vertex(K: DeltaComplex) -> int:
    """The interior discriminant vertex where the most discriminant edges meet."""
    cands = interior_delta_vertices(K)
    if not cands:
        raise PuncturedError("no interior discriminant vertex")
    deg = {v: sum(1 for e in K.delta if len(e) == 2 and v in e) for v in cands}
    return max(cands, key=lambda v: (deg[v], -v))


def boundary_system(L: LocalSystem) -> tuple[DeltaComplex, LocalSystem]:
    """The boundary sphere as an (n-1)-complex with the local system seen from inside.

    Each boundary facet takes the gauge frame of its top coface. Neighbouring
    facets are related by transport through the star of their common face.
    """
    K = L.base
    facets = [f for f in K.simplices[K.n - 1] if f in K.boundary]
    if not facets:
        raise PuncturedError("the complex has no boundary")
    verts = sorted({v for f in facets for v in f})
    vid = {v: i for i, v in enumerate(verts)}

    def relabel(s):
        return tuple(vid[v] for v in s)
    cells = [relabel(f) for f in facets]
    owner = {relabel(f): K.top_cofaces(f)[0] for f in facets}
    delta = [relabel(s) for s in K.delta if s in K.boundary]
    Kd = DeltaComplex(cells, K.n - 1, delta=delta)
    trans = {}
    for e in Kd.simplices[Kd.n - 1]:
        cs = Kd.cofaces(e)
        if len(cs) != 2:
            continue
        a, b = cs
        inv_e = tuple(verts[i] for i in e)
        M = L.star_transport(inv_e, owner[a], owner[b])
        if M != L._ident:
            trans[(a, b)] = M
    return Kd, LocalSystem(Kd, L.rank, trans)
