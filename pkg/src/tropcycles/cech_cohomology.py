"""Čech complexes for the vertex-star and maximal-cell covers.

Vertex-star cover: the open stars W_v of vertices. Finite intersections are open
stars of simplices, so degree i runs over the i-simplices. The sections are
those of the open-kind functor.

Maximal-cell cover: small neighbourhoods U_c of the top cells c. An index set I
has intersection U_I, which is a neighbourhood of the closed simplex ρ = ∩I. Its
sections are those of the closed-kind functor at ρ. The relative complex for
(B, ∂B) is the mapping cone of restriction to the boundary.
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from .constructible_sheaf import SheafFunctor
from .exact_algebra import ExactMatrix
from .homology_engine import (
    GradedComplex, HomologyGroup, SparseMatrix, chain_complex, homology,
)
from .simplicial_complex import DeltaComplex, Simplex


class CechError(ValueError):
    pass


class CechComplex(GradedComplex):
    """Cochain complex whose degree-i basis is indexed by keys with a section simplex."""

    def __init__(self, kind: str, F: SheafFunctor, keys: list[list], section: dict,
                 d: dict, dims: list[int], blocks: list[dict]):
        super().__init__(dims, d, cochain=True)
        self.kind = kind
        self.F = F
        self.keys = keys
        self.section = section
        self.blocks = blocks

    def cochain_from_cells(self, deg: int, cells: dict) -> dict[int, int]:
        out = {}
        for key, vec in cells.items():
            if key not in self.blocks[deg]:
                if any(vec):
                    raise CechError(f"{key} is not an index in degree {deg}")
                continue
            o, r = self.blocks[deg][key]
            c = self.F.lattice(self.section[key]).coordinates(list(vec))
            if c is None:
                raise CechError(f"value on {key} is not a section")
            for k, v in enumerate(c):
                if v:
                    out[o + k] = v
        return out

    def cells_from_cochain(self, deg: int, vec: dict[int, int]) -> dict:
        out = {}
        for key, (o, r) in self.blocks[deg].items():
            coeff = [vec.get(o + k, 0) for k in range(r)]
            if any(coeff):
                out[key] = self.F.lattice(self.section[key]).basis.apply(coeff)
        return out


def _assemble(kind, F, keys_by_deg, section, restrict_sign):
    """Common assembly; restrict_sign(key) yields (sub_key, sign) pairs for δ."""
    blocks, dims = [], []
    for keys in keys_by_deg:
        off, blk = 0, {}
        for k in keys:
            r = F.rank(section[k])
            blk[k] = (off, r)
            off += r
        blocks.append(blk)
        dims.append(off)
    d = {}
    for deg in range(len(keys_by_deg) - 1):
        M = SparseMatrix(dims[deg + 1], dims[deg])
        for key, (o, r) in blocks[deg + 1].items():
            if not r:
                continue
            for sub, sg in restrict_sign(key):
                if sub not in blocks[deg]:
                    continue
                os_, rs = blocks[deg][sub]
                if not rs:
                    continue
                R = _section_map(F, section[sub], section[key])
                for a in range(r):
                    row = R.entries[a]
                    for b in range(rs):
                        if row[b]:
                            M.add(o + a, os_ + b, sg * row[b])
        d[deg] = M
    return CechComplex(kind, F, keys_by_deg, section, d, dims, blocks)


def _section_map(F: SheafFunctor, big_open_simplex: Simplex, small_open_simplex: Simplex) -> ExactMatrix:
    """Restriction of sections from the larger open set to the smaller one."""
    if F.kind == "open":
        # W_tau ⊇ W_sigma for tau ⊂ sigma: open functor goes tau -> sigma
        return F.restriction(big_open_simplex, small_open_simplex)
    # closed kind: neighbourhood of rho' ⊇ neighbourhood of rho ⊂ rho'
    if big_open_simplex == small_open_simplex:
        return ExactMatrix.identity(F.rank(big_open_simplex))
    return F.restriction(small_open_simplex, big_open_simplex)


def vertex_star_cech(K: DeltaComplex, F: SheafFunctor, rel: str | None = None) -> CechComplex:
    """Čech complex of the vertex-star cover (relative: drop boundary simplices)."""
    if F.kind != "open":
        raise CechError("vertex-star Čech complex needs an open-kind functor")
    drop = set(K.boundary) if rel == "boundary" else set()
    if rel not in (None, "none", "boundary"):
        raise CechError(f"unsupported relative flag {rel!r}")
    keys = [[s for s in K.simplices[d] if s not in drop] for d in range(K.n + 1)]
    section = {s: s for d in keys for s in d}

    def faces(s):
        return [(s[:k] + s[k + 1:], -1 if k % 2 else 1) for k in range(len(s))] if len(s) > 1 else []
    return _assemble("vertex_star", F, keys, section, faces)


def _maxcell_nerve(K: DeltaComplex, restrict_to=None):
    """Index sets of top cells with nonempty intersection, with their intersections.

    Top cells are numbered by the global order. Each key is a sorted tuple of
    top-cell numbers; ``restrict_to`` keeps only keys whose intersection meets it.
    """
    tops = K.top
    tid = {c: i for i, c in enumerate(tops)}
    section = {}
    for rho in K.all_simplices():
        cof = [tid[c] for c in K.top_cofaces(rho)]
        rs = set(rho)
        for r in range(1, len(cof) + 1):
            for I in combinations(cof, r):
                inter = set(tops[I[0]])
                for i in I[1:]:
                    inter &= set(tops[i])
                if inter == rs:
                    section[I] = rho
    return section


def maxcell_cech(K: DeltaComplex, F: SheafFunctor, with_boundary: bool = False):
    """Čech complex of the top-cell cover and, optionally, the relative cone.

    Returns (C_B, cone) where cone is None unless ``with_boundary``.
    """
    if F.kind != "closed":
        raise CechError("maximal-cell Čech complex uses closed-kind sections")
    section = _maxcell_nerve(K)
    top = max((len(I) for I in section), default=1)
    keys = [[] for _ in range(top)]
    for I in sorted(section, key=lambda I: (len(I), I)):
        keys[len(I) - 1].append(I)

    def faces(I):
        return [(I[:k] + I[k + 1:], -1 if k % 2 else 1) for k in range(len(I))] if len(I) > 1 else []
    CB = _assemble("max_cell", F, keys, section, faces)
    if not with_boundary:
        return CB, None
    # boundary cover: same index sets, sections on the face inside the boundary
    bsec = {}
    for I, rho in section.items():
        b = tuple(v for v in rho if (v,) in K.boundary)
        if not b:
            continue
        if b not in K.boundary:
            raise CechError(f"{rho} meets the boundary in a non-face")
        bsec[I] = b
    bkeys = [[I for I in lvl if I in bsec] for lvl in keys]
    CdB = _assemble("max_cell_boundary", F, bkeys, bsec, faces)
    return CB, cone_complex(CB, CdB)


def boundary_facet_cech(K: DeltaComplex, F: SheafFunctor) -> CechComplex:
    """Čech complex of ∂B for the cover by boundary facets (closed-kind sections)."""
    if F.kind != "closed":
        raise CechError("boundary-facet Čech complex uses closed-kind sections")
    facets = [s for s in K.simplices[K.n - 1] if s in K.boundary]
    section = {}
    for r in range(1, len(facets) + 1):
        found = False
        for I in combinations(range(len(facets)), r):
            inter = set(facets[I[0]])
            for i in I[1:]:
                inter &= set(facets[i])
                if not inter:
                    break
            if inter:
                section[I] = tuple(sorted(inter))
                found = True
        if not found:
            break
    top = max((len(I) for I in section), default=1)
    keys = [[] for _ in range(top)]
    for I in sorted(section, key=lambda I: (len(I), I)):
        keys[len(I) - 1].append(I)

    def faces(I):
        return [(I[:k] + I[k + 1:], -1 if k % 2 else 1) for k in range(len(I))] if len(I) > 1 else []
    return _assemble("boundary_facet", F, keys, section, faces)


def boundary_cover_check(K: DeltaComplex, F: SheafFunctor, field: str = "Z") -> dict:
    """Both Čech models of ∂B have the same cohomology."""
    _, cone = maxcell_cech(K, F, with_boundary=True)
    a = [h.invariants() for h in homology(cone.CdB, field, representatives=False)]
    b = [h.invariants() for h in homology(boundary_facet_cech(K, F), field, representatives=False)]
    zero = (0, ())
    n = max(len(a), len(b))
    a += [zero] * (n - len(a))
    b += [zero] * (n - len(b))
    return {"ok": a == b, "restricted": a, "boundary_facets": b}


class ConeComplex(GradedComplex):
    """C^j(B, ∂B) = C^j(B) ⊕ C^{j-1}(∂B) with d(a, b) = (δa, r(a) - δb)."""

    def __init__(self, CB: CechComplex, CdB: CechComplex, r: dict):
        self.CB, self.CdB, self.r = CB, CdB, r
        T = max(CB.top, CdB.top + 1)
        dimsB = [CB.dims[j] if j <= CB.top else 0 for j in range(T + 1)]
        dimsD = [CdB.dims[j - 1] if 1 <= j <= CdB.top + 1 else 0 for j in range(T + 1)]
        dims = [a + b for a, b in zip(dimsB, dimsD)]
        d = {}
        for j in range(T):
            M = SparseMatrix(dims[j + 1], dims[j])
            offB = dimsB[j + 1]
            dB = CB.d.get(j)
            if dB is not None:
                for col, c in dB.cols.items():
                    for row, v in c.items():
                        M.add(row, col, v)
            rj = r.get(j)
            if rj is not None:
                for col, c in rj.cols.items():
                    for row, v in c.items():
                        M.add(offB + row, col, v)
            dD = CdB.d.get(j - 1) if j >= 1 else None
            if dD is not None:
                for col, c in dD.cols.items():
                    for row, v in c.items():
                        M.add(offB + row, dimsB[j] + col, -v)
            d[j] = M
        super().__init__(dims, d, cochain=True)
        self.dimsB, self.dimsD = dimsB, dimsD

    def check_exact_sequence(self) -> bool:
        return all(a + b == c for a, b, c in zip(self.dimsB, self.dimsD, self.dims))


def cone_complex(CB: CechComplex, CdB: CechComplex) -> ConeComplex:
    """Cone of the restriction C(B) -> C(∂B) (same index sets, face on the boundary)."""
    F = CB.F
    r = {}
    for j in range(min(CB.top, CdB.top) + 1):
        M = SparseMatrix(CdB.dims[j], CB.dims[j])
        for I, (o, rk) in CB.blocks[j].items():
            if I not in CdB.blocks[j] or not rk:
                continue
            ob, rb = CdB.blocks[j][I]
            if not rb:
                continue
            R = _section_map(F, CB.section[I], CdB.section[I])
            for a in range(rb):
                for b in range(rk):
                    if R.entries[a][b]:
                        M.add(ob + a, o + b, R.entries[a][b])
        r[j] = M
    return ConeComplex(CB, CdB, r)


# ---------------------------------------------------------------- filtration

class FilteredCech:
    """Max-cell Čech complex with terms grouped by their intersection simplex."""

    def __init__(self, K: DeltaComplex, F: SheafFunctor):
        self.K = K
        self.F = F
        self.C, _ = maxcell_cech(K, F)

    def _sections(self) -> dict:
        """{tau: per-degree index lists of the terms whose intersection is tau}."""
        if getattr(self, "_by_tau", None) is None:
            C = self.C
            by = {}
            for deg in range(C.top + 1):
                for I, (o, r) in sorted(C.blocks[deg].items(), key=lambda t: t[1][0]):
                    lists = by.setdefault(C.section[I], [[] for _ in range(C.top + 1)])
                    lists[deg].extend(range(o, o + r))
            self._by_tau = by
        return self._by_tau

    def _restrict(self, sel: list) -> GradedComplex:
        C = self.C
        pos = [{x: i for i, x in enumerate(s)} for s in sel]
        d = {}
        for deg in range(C.top):
            M = SparseMatrix(len(sel[deg + 1]), len(sel[deg]))
            src = C.d.get(deg)
            if src is not None:
                for j in sel[deg]:
                    for i, v in src.cols.get(j, {}).items():
                        if i in pos[deg + 1]:
                            M.add(pos[deg + 1][i], pos[deg][j], v)
            d[deg] = M
        G = GradedComplex([len(s) for s in sel], d, cochain=True)
        G.selection = sel
        return G

    def graded_piece(self, k: int) -> GradedComplex:
        """Gr^k: terms with codim(∩I) = k and the projected differential."""
        C, K = self.C, self.K
        sel = [[] for _ in range(C.top + 1)]
        for tau, lists in self._sections().items():
            if K.n - (len(tau) - 1) == k:
                for deg, idx in enumerate(lists):
                    sel[deg].extend(idx)
        for idx in sel:
            idx.sort()
        return self._restrict(sel)

    def graded_block(self, tau: Simplex) -> GradedComplex:
        """The summand of Gr^k supported on terms with intersection tau.

        The projected differential never changes the intersection simplex, so
        Gr^k is the direct sum of these blocks.
        """
        empty = [[] for _ in range(self.C.top + 1)]
        return self._restrict(self._sections().get(tau, empty))

    def tau_complex(self, tau: Simplex) -> GradedComplex:
        """C_tau with integer coefficients: index sets whose intersection is tau."""
        C = self.C
        if getattr(self, "_keys_by_tau", None) is None:
            by = {}
            for deg in range(C.top + 1):
                for I in C.keys[deg]:
                    by.setdefault(C.section[I], [[] for _ in range(C.top + 1)])[deg].append(I)
            self._keys_by_tau = by
        keys = self._keys_by_tau.get(tau) or [[] for _ in range(C.top + 1)]
        pos = [{I: i for i, I in enumerate(ks)} for ks in keys]
        d = {}
        for deg in range(C.top):
            M = SparseMatrix(len(keys[deg + 1]), len(keys[deg]))
            for J in keys[deg + 1]:
                for k in range(len(J)):
                    I = J[:k] + J[k + 1:]
                    if I in pos[deg]:
                        M.add(pos[deg + 1][J], pos[deg][I], -1 if k % 2 else 1)
            d[deg] = M
        G = GradedComplex([len(k) for k in keys], d, cochain=True)
        G.keys = keys
        return G


def graded_concentration_check(FC: FilteredCech, with_bases: bool = True) -> dict:
    """Rank table of H^i(Gr^k) against the predicted diagonal."""
    K, F = FC.K, FC.F
    rows, ok = [], True
    top = FC.C.top
    for k in range(K.n + 1):
        betti, torsion = [0] * (top + 1), [[] for _ in range(top + 1)]
        for tau in K.simplices[K.n - k]:
            for h in homology(FC.graded_block(tau), "Z", representatives=False):
                betti[h.degree] += h.betti
                torsion[h.degree].extend(h.torsion)
        predicted = sum(F.rank(s) for s in K.simplices[K.n - k] if s not in K.boundary)
        for i in range(top + 1):
            got = (betti[i], tuple(sorted(torsion[i])))
            want = (predicted, ()) if i == k else (0, ())
            good = got == want
            ok &= good
            rows.append({"i": i, "k": k, "rank": got[0], "torsion": got[1],
                         "expected": want[0], "ok": good})
    out = {"ok": ok, "rows": rows}
    if ok and with_bases:
        # z_tau ⊗ (lattice basis of A_tau) spans the diagonal term for codim k
        bases = {}
        for d in range(K.n + 1):
            for tau in K.simplices[d]:
                if tau in K.boundary or not F.rank(tau):
                    continue
                T = FC.tau_complex(tau)
                h = [g for g in homology(T, "Z") if g.degree == K.n - d][0]
                z = {T.keys[K.n - d][i]: c for i, c in sorted(h.free_gens[0].items())}
                bases[tau] = {"cocycle": z, "sections": F.lattice(tau).vectors()}
        out["bases"] = bases
    return out


def d1_equals_boundary_check(K: DeltaComplex, F: SheafFunctor) -> dict:
    """Compare the E_1 differential with the relative boundary map.

    For each interior simplex tau, let z_tau generate H^{codim}(C_tau) ≅ Z. The map
    f(alpha) = z_tau ⊗ alpha identifies C_i(B, ∂B) with the E_1 diagonal. We push
    f(alpha) through the Čech differential and read off its class on each facet
    omega. The result has to equal s_omega s_tau ε(omega ⊂ tau) times the
    restriction map, for one fixed choice of signs s.
    """
    FC = FilteredCech(K, F)
    C = FC.C
    gens, coords = {}, {}
    for d in range(K.n + 1):
        for tau in K.simplices[d]:
            if tau in K.boundary:
                continue
            T = FC.tau_complex(tau)
            k = K.n - d
            H = {h.degree: h for h in homology(T, "Z")}
            h = H.get(k)
            if h is None or h.betti != 1 or h.torsion:
                return {"ok": False, "reason": f"H^{k}(C_tau) is not Z for {tau}"}
            gens[tau] = (T, h.free_gens[0])
            coords[tau] = (T, h)
    entries = []
    for d in range(1, K.n + 1):
        for tau in K.simplices[d]:
            if tau in K.boundary:
                continue
            T, z = gens[tau]
            k = K.n - d
            r = F.rank(tau)
            for a in range(r):
                # cochain z ⊗ e_a in C^k
                vec = {}
                for idx, cz in z.items():
                    I = T.keys[k][idx]
                    o, _ = C.blocks[k][I]
                    vec[o + a] = cz
                img = C.d[k].apply(vec) if k in C.d else {}
                for j in range(len(tau)):
                    om = tau[:j] + tau[j + 1:]
                    if om in K.boundary:
                        continue
                    To, ho = coords[om]
                    ro = F.rank(om)
                    for b in range(ro):
                        comp = {}
                        for pos, J in enumerate(To.keys[k + 1]):
                            o, _ = C.blocks[k + 1][J]
                            v = img.get(o + b, 0)
                            if v:
                                comp[pos] = v
                        c = ho.coordinates(comp)[0] if comp else 0
                        want = (-1 if j % 2 else 1) * F.restriction(om, tau).entries[b][a]
                        entries.append((tau, om, a, b, c, want))
    # fit cell signs s with c = s_om * s_tau * want
    sign: dict[Simplex, int] = {}
    adj: dict = {}
    for tau, om, a, b, c, want in entries:
        if c == 0 and want == 0:
            continue
        if abs(c) != abs(want):
            return {"ok": False, "reason": f"magnitude mismatch on {om}⊂{tau}", "entries": len(entries)}
        rel = 1 if c == want else -1
        adj.setdefault(tau, []).append((om, rel))
        adj.setdefault(om, []).append((tau, rel))
    for s0 in sorted(adj, key=lambda s: (len(s), s)):
        if s0 in sign:
            continue
        sign[s0] = 1
        stack = [s0]
        while stack:
            s = stack.pop()
            for t, rel in adj[s]:
                want = sign[s] * rel
                if t in sign:
                    if sign[t] != want:
                        return {"ok": False, "reason": "no consistent sign choice", "entries": len(entries)}
                else:
                    sign[t] = want
                    stack.append(t)
    return {"ok": True, "entries": len(entries), "signs": sign}


# ---------------------------------------------------------------- duality

def cohomology(K: DeltaComplex, L, p: int, rel: str | None = None, cover: str = "auto",
               field: str = "Z", dual: bool = False) -> list[HomologyGroup]:
    """H^*(B; ι_*∧^p) or H^*(B, ∂B; ι_*∧^p) by a Čech complex."""
    from .constructible_sheaf import SheafFunctor
    if cover == "auto":
        cover = "max_cell" if K.n <= 2 else "vertex_star"
    if cover == "vertex_star":
        F = SheafFunctor(L, p, "open", field, dual)
        return homology(vertex_star_cech(K, F, rel), field)
    if cover != "max_cell":
        raise CechError(f"unknown cover {cover!r}")
    F = SheafFunctor(L, p, "closed", field, dual)
    CB, cone = maxcell_cech(K, F, with_boundary=(rel == "boundary"))
    return homology(cone if rel == "boundary" else CB, field)


def verify_pl_duality(K: DeltaComplex, F: SheafFunctor, cover: str = "auto", field: str = "Z") -> dict:
    """Compare H_k(B,∂B) with H^{n-k}(B) and H_k(B) with H^{n-k}(B,∂B)."""
    from .constructible_sheaf import SheafFunctor
    n = K.n
    Fc = F if F.kind == "closed" else SheafFunctor(F.L, F.p, "closed", field, F.dual)
    ho_rel = {h.degree: h.invariants() for h in homology(chain_complex(K, Fc, "boundary"), field, representatives=False)}
    ho_abs = {h.degree: h.invariants() for h in homology(chain_complex(K, Fc), field, representatives=False)}
    co_abs = {h.degree: h.invariants() for h in cohomology(K, F.L, F.p, None, cover, field, F.dual)}
    co_rel = {h.degree: h.invariants() for h in cohomology(K, F.L, F.p, "boundary", cover, field, F.dual)}
    zero = (0, ())
    rows, ok = [], True
    for k in range(n + 1):
        a, b = ho_rel.get(k, zero), co_abs.get(n - k, zero)
        c, d = ho_abs.get(k, zero), co_rel.get(n - k, zero)
        good = a == b and c == d
        ok &= good
        rows.append({"k": k, "H_k(B,dB)": a, "H^n-k(B)": b, "H_k(B)": c, "H^n-k(B,dB)": d, "ok": good})
    for j in list(co_abs) + list(co_rel):
        if j > n and (co_abs.get(j, zero) != zero or co_rel.get(j, zero) != zero):
            ok = False
            rows.append({"k": n - j, "extra_cohomology_degree": j, "ok": False})
    return {"ok": ok, "rows": rows}
