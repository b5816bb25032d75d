"""Chain complexes of constructible functors and their homology.

Homology runs in two stages. First, entries equal to ±1 are cancelled in pairs
by Gaussian elimination. Each cancellation keeps a chain homotopy equivalence, so
the group is unchanged. The few generators that survive then go through a dense
Smith normal form. The elimination steps are recorded, which lets us map cycle
representatives back to the original chains and project given cycles forward.
"""

from __future__ import annotations

from typing import Sequence

from .exact_algebra import (
    ExactMatrix, kernel_lattice, smith_divisors, smith_normal_form, solve_integer,
)
from .simplicial_complex import (
    DeltaComplex, Simplex, barycentric_subdivision, boundary_sign, closed_star,
)


class HomologyError(ValueError):
    pass


# ---------------------------------------------------------------- sparse matrices

class SparseMatrix:
    """Column-major sparse integer matrix: cols[j] = {i: value}."""

    __slots__ = ("rows", "ncols", "cols")

    def __init__(self, rows: int, ncols: int, cols: dict | None = None):
        self.rows = rows
        self.ncols = ncols
        self.cols: dict[int, dict[int, int]] = cols if cols is not None else {}

    def add(self, i: int, j: int, v: int):
        if not v:
            return
        c = self.cols.setdefault(j, {})
        w = c.get(i, 0) + v
        if w:
            c[i] = w
        else:
            del c[i]
            if not c:
                del self.cols[j]

    def dense(self) -> ExactMatrix:
        out = [[0] * self.ncols for _ in range(self.rows)]
        for j, c in self.cols.items():
            for i, v in c.items():
                out[i][j] = v
        return ExactMatrix(out, self.rows, self.ncols)

    def apply(self, x: dict[int, int]) -> dict[int, int]:
        out: dict[int, int] = {}
        for j, a in x.items():
            for i, v in self.cols.get(j, {}).items():
                out[i] = out.get(i, 0) + a * v
        return {i: v for i, v in out.items() if v}

    def transpose(self) -> "SparseMatrix":
        t = SparseMatrix(self.ncols, self.rows)
        for j, c in self.cols.items():
            for i, v in c.items():
                t.cols.setdefault(i, {})[j] = v
        return t

    def compose(self, other: "SparseMatrix") -> "SparseMatrix":
        out = SparseMatrix(self.rows, other.ncols)
        for j, c in other.cols.items():
            col = self.apply(c)
            if col:
                out.cols[j] = col
        return out

    def is_zero(self) -> bool:
        return not self.cols

    @classmethod
    def from_dense(cls, M: ExactMatrix) -> "SparseMatrix":
        s = cls(M.rows, M.cols)
        for i, r in enumerate(M.entries):
            for j, v in enumerate(r):
                if v:
                    s.cols.setdefault(j, {})[i] = v
        return s


# ---------------------------------------------------------------- graded complexes

class GradedComplex:
    """Chain complex C_0 <- C_1 <- ... <- C_top with d[i]: C_i -> C_{i-1}.

    ``labels[i]`` names the basis of C_i as (simplex, coordinate index) pairs, or
    arbitrary hashable labels for abstract complexes. Cochain complexes use the
    same class with ``cochain=True``; then d[i]: C^i -> C^{i+1}.
    """

    def __init__(self, dims: Sequence[int], d: dict[int, SparseMatrix], labels=None,
                 cochain: bool = False, degree_offset: int = 0):
        self.dims = list(dims)
        self.d = d
        self.labels = labels
        self.cochain = cochain
        self.offset = degree_offset

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def differential(self, i: int) -> ExactMatrix:
        """Dense matrix of the differential leaving degree i."""
        tgt = i + 1 if self.cochain else i - 1
        rows = self.dims[tgt] if 0 <= tgt <= self.top else 0
        cols = self.dims[i] if 0 <= i <= self.top else 0
        M = self.d.get(i)
        if M is None:
            return ExactMatrix.zeros(rows, cols)
        return M.dense()

    def check_d_squared(self) -> bool:
        for i in range(self.top + 1):
            j = i + 1 if self.cochain else i - 1
            if i in self.d and j in self.d:
                if not self.d[j].compose(self.d[i]).is_zero():
                    return False
        return True

    def euler_characteristic(self) -> int:
        return sum((-1) ** (i + self.offset) * r for i, r in enumerate(self.dims))

    def _as_chain(self):
        """Re-index a cochain complex as a chain complex (degree k -> top - k)."""
        if not self.cochain:
            return self.dims, self.d, lambda i: i
        T = self.top
        dims = list(reversed(self.dims))
        d = {T - k: M for k, M in self.d.items()}
        return dims, d, lambda i: T - i


class HomologyGroup:
    """betti, torsion and representatives in the original basis of one degree."""

    def __init__(self, degree: int, betti: int, torsion: tuple, free_gens: list,
                 torsion_gens: list, field: str = "Z"):
        self.degree = degree
        self.betti = betti
        self.torsion = tuple(torsion)
        self.free_gens = free_gens        # list of dict index -> int
        self.torsion_gens = torsion_gens
        self.field = field
        self._coords = None

    @property
    def cycle_basis(self):
        return self.free_gens + self.torsion_gens

    def __repr__(self):
        t = f", torsion={list(self.torsion)}" if self.torsion else ""
        return f"H_{self.degree}(betti={self.betti}{t})"

    def invariants(self):
        return (self.betti, self.torsion)

    def coordinates(self, chain: dict[int, int]) -> list[int]:
        """Free coordinates of a cycle's class in the free generator basis."""
        if self._coords is None:
            raise HomologyError("class coordinates unavailable for this group")
        return self._coords(chain)[0]

    def torsion_coordinates(self, chain: dict[int, int]) -> list[int]:
        if self._coords is None:
            raise HomologyError("class coordinates unavailable for this group")
        return self._coords(chain)[1]


class _Reduction:
    """Unit-pivot elimination of a chain complex with recorded steps."""

    def __init__(self, dims, d):
        self.dims = dims
        self.top = len(dims) - 1
        # mutable sparse copies, with row indices per degree
        self.cols: dict[int, dict[int, dict[int, int]]] = {}
        self.rows: dict[int, dict[int, set]] = {}
        for i in range(1, self.top + 1):
            M = d.get(i)
            cols = {j: dict(c) for j, c in M.cols.items()} if M is not None else {}
            rows: dict[int, set] = {}
            for j, c in cols.items():
                for r in c:
                    rows.setdefault(r, set()).add(j)
            self.cols[i], self.rows[i] = cols, rows
        self.alive = [set(range(n)) for n in dims]
        self.steps: list = []   # (i, a, b, u, beta_row, gamma_col)

    def run(self):
        for i in range(1, self.top + 1):
            self._reduce_degree(i)

    def _reduce_degree(self, i):
        cols, rows = self.cols[i], self.rows[i]
        changed = True
        while changed:
            changed = False
            for a in sorted(cols):
                c = cols.get(a)
                if not c:
                    continue
                best = None
                for b, v in c.items():
                    if v in (1, -1):
                        cost = len(rows[b])
                        if best is None or cost < best[0] or (cost == best[0] and b < best[1]):
                            best = (cost, b)
                if best is None:
                    continue
                self._eliminate(i, a, best[1])
                changed = True

    def _eliminate(self, i, a, b):
        cols, rows = self.cols[i], self.rows[i]
        col_a = cols.pop(a)
        u = col_a.pop(b)
        for r in col_a:
            rows[r].discard(a)
        rows[b].discard(a)
        beta = {}
        for x in sorted(rows.pop(b)):
            cx = cols[x]
            bx = cx.pop(b)
            beta[x] = bx
            f = bx * u  # u^{-1} = u for units
            for r, v in col_a.items():
                w = cx.get(r, 0) - v * f
                if w:
                    if r not in cx:
                        rows[r].add(x)
                    cx[r] = w
                elif r in cx:
                    del cx[r]
                    rows[r].discard(x)
            if not cx:
                del cols[x]
        gamma = dict(col_a)
        # drop row a from d_{i+1} and column b from d_{i-1}
        if i + 1 <= self.top:
            up_c, up_r = self.cols[i + 1], self.rows[i + 1]
            for x in up_r.pop(a, ()):
                del up_c[x][a]
                if not up_c[x]:
                    del up_c[x]
        if i - 1 >= 1:
            dn_c, dn_r = self.cols[i - 1], self.rows[i - 1]
            cb = dn_c.pop(b, None)
            if cb:
                for r in cb:
                    dn_r[r].discard(b)
        self.alive[i].discard(a)
        self.alive[i - 1].discard(b)
        self.steps.append((i, a, b, u, beta, gamma))

    def lift(self, deg: int, x: dict[int, int]) -> dict[int, int]:
        """Apply the inclusion of the reduced complex into the original one."""
        x = dict(x)
        for (i, a, b, u, beta, gamma) in reversed(self.steps):
            if i != deg:
                continue
            s = sum(beta.get(k, 0) * v for k, v in x.items())
            if s:
                x[a] = x.get(a, 0) - u * s
        return {k: v for k, v in x.items() if v}

    def project(self, deg: int, x: dict[int, int]) -> dict[int, int]:
        """Apply the projection of the original complex onto the reduced one."""
        x = dict(x)
        for (i, a, b, u, beta, gamma) in self.steps:
            if i == deg:
                x.pop(a, None)
            elif i - 1 == deg:
                t = x.pop(b, 0)
                if t:
                    f = u * t
                    for r, v in gamma.items():
                        w = x.get(r, 0) - v * f
                        if w:
                            x[r] = w
                        else:
                            x.pop(r, None)
        return {k: v for k, v in x.items() if v}

    def small_matrix(self, i) -> tuple[ExactMatrix, list, list]:
        """Dense remaining d_i with the surviving source and target indices."""
        src = sorted(self.alive[i]) if 0 <= i <= self.top else []
        tgt = sorted(self.alive[i - 1]) if 1 <= i <= self.top + 1 else []
        if i < 1 or i > self.top:
            return ExactMatrix.zeros(len(tgt), len(src)), src, tgt
        pos = {r: k for k, r in enumerate(tgt)}
        out = [[0] * len(src) for _ in tgt]
        cols = self.cols[i]
        for k, j in enumerate(src):
            for r, v in cols.get(j, {}).items():
                out[pos[r]][k] = v
        return ExactMatrix(out, len(tgt), len(src)), src, tgt


def homology(C: GradedComplex, field: str = "Z", degrees: Sequence[int] | None = None,
             representatives: bool = True) -> list[HomologyGroup]:
    """Per-degree homology (or cohomology for cochain complexes)."""
    if field not in ("Z", "Q"):
        raise HomologyError(f"unknown field {field!r}")
    dims, d, to_orig = C._as_chain()
    red = _Reduction(dims, d)
    red.run()
    top = len(dims) - 1
    want = range(top + 1) if degrees is None else [to_orig(k) for k in degrees]
    out = {}
    for i in want:
        if i < 0 or i > top:
            continue
        out[to_orig(i)] = _homology_small(red, i, field, representatives, to_orig(i) + C.offset)
    keys = sorted(out)
    return [out[k] for k in keys]


def _homology_small(red: _Reduction, i: int, field: str, reps: bool, label: int) -> HomologyGroup:
    Di, src, tgt = red.small_matrix(i)          # C_i -> C_{i-1}
    Dn, src_n, tgt_n = red.small_matrix(i + 1)  # C_{i+1} -> C_i
    zi = len(src)
    if zi == 0:
        return HomologyGroup(label, 0, (), [], [], field)
    Z = kernel_lattice(Di) if Di.rows else None
    Kb = Z.basis if Z is not None else ExactMatrix.identity(zi)
    z = Kb.cols
    if z == 0:
        return HomologyGroup(label, 0, (), [], [], field)
    # boundaries in kernel coordinates
    if Dn.cols:
        Bcols = []
        for j in range(Dn.cols):
            c = solve_integer(Kb, Dn.column(j))
            if c is None:
                raise HomologyError("boundary not contained in cycles: d^2 != 0")
            Bcols.append(c)
        B = ExactMatrix.from_columns(Bcols, z)
    else:
        B = ExactMatrix.zeros(z, 0)
    s = smith_normal_form(B)
    r = s.rank
    tors = tuple(dv for dv in s.divisors if dv > 1)
    betti = z - r
    Ui = s.U_inv
    G = Kb @ Ui  # columns: generators in surviving coordinates
    free_gens, tors_gens = [], []
    if reps:
        for j in range(z):
            if j < r and (field == "Q" or s.divisors[j] == 1):
                continue
            vec = {src[k]: G.entries[k][j] for k in range(zi) if G.entries[k][j]}
            lifted = red.lift(i, vec)
            (free_gens if j >= r else tors_gens).append(lifted)
    H = HomologyGroup(label, betti, () if field == "Q" else tors, free_gens, tors_gens, field)
    U = s.U
    divs = s.divisors
    pos = {x: k for k, x in enumerate(src)}

    def coords(chain):
        pr = red.project(i, chain)
        v = [0] * zi
        for k, val in pr.items():
            if k not in pos:
                raise HomologyError("chain has components outside the reduced basis")
            v[pos[k]] = val
        c = solve_integer(Kb, v)
        if c is None:
            raise HomologyError("chain is not a cycle")
        w = U.apply(c)
        free = w[r:]
        tor = [w[j] % divs[j] for j in range(r) if divs[j] > 1] if field == "Z" else []
        return free, tor

    H._coords = coords
    return H


# ---------------------------------------------------------------- sheaf chain complexes

class ChainComplexOfSheaf(GradedComplex):
    """Simplicial chains with coefficients in a closed-kind functor."""

    def __init__(self, K: DeltaComplex, F, rel: str | None = None, region=None):
        self.K = K
        self.F = F
        self.rel = rel
        excluded = _rel_set(K, rel)
        allowed = None if region is None else set(region)
        self.blocks: list[dict[Simplex, tuple[int, int]]] = []
        dims = []
        labels = []
        for dd in range(K.n + 1):
            off = 0
            blk = {}
            lab = []
            for s in K.simplices[dd]:
                if s in excluded or (allowed is not None and s not in allowed):
                    continue
                r = F.rank(s)
                blk[s] = (off, r)
                lab.extend((s, k) for k in range(r))
                off += r
            self.blocks.append(blk)
            dims.append(off)
            labels.append(lab)
        d = {}
        for dd in range(1, K.n + 1):
            M = SparseMatrix(dims[dd - 1], dims[dd])
            for s, (o, r) in self.blocks[dd].items():
                if not r:
                    continue
                for k in range(len(s)):
                    f = s[:k] + s[k + 1:]
                    if f not in self.blocks[dd - 1]:
                        continue
                    of, rf = self.blocks[dd - 1][f]
                    if not rf:
                        continue
                    R = F.restriction(f, s)
                    sg = -1 if k % 2 else 1
                    for a in range(rf):
                        row = R.entries[a]
                        for b in range(r):
                            if row[b]:
                                M.add(of + a, o + b, sg * row[b])
            d[dd] = M
        super().__init__(dims, d, labels)

    def chain_from_cells(self, deg: int, cells: dict) -> dict[int, int]:
        """Chain vector from {simplex: ambient wedge vector (anchor frame)}."""
        out = {}
        for s, vec in cells.items():
            s = tuple(s)
            if s not in self.blocks[deg]:
                if any(vec):
                    raise HomologyError(f"simplex {s} is not a generator in degree {deg}")
                continue
            o, r = self.blocks[deg][s]
            c = self.F.lattice(s).coordinates(list(vec))
            if c is None:
                raise HomologyError(f"coefficient on {s} is not in the sheaf lattice")
            for k, v in enumerate(c):
                if v:
                    out[o + k] = v
        return out

    def cells_from_chain(self, deg: int, chain: dict[int, int]) -> dict:
        """Inverse of chain_from_cells: {simplex: ambient vector}."""
        out = {}
        for s, (o, r) in self.blocks[deg].items():
            coeff = [chain.get(o + k, 0) for k in range(r)]
            if any(coeff):
                B = self.F.lattice(s).basis
                out[s] = B.apply(coeff)
        return out

    def boundary_of(self, deg: int, chain: dict[int, int]) -> dict[int, int]:
        if deg == 0:
            return {}
        return self.d[deg].apply(chain)


def _rel_set(K: DeltaComplex, rel):
    if rel in (None, "none"):
        return set()
    if rel == "delta":
        return set(K.delta)
    if rel == "boundary":
        return set(K.boundary)
    raise HomologyError(f"unknown relative flag {rel!r}")


def chain_complex(K: DeltaComplex, F, rel: str | None = None) -> ChainComplexOfSheaf:
    if F.kind != "closed":
        raise HomologyError("homology needs a closed-kind functor")
    if F.complex is not K:
        raise HomologyError("functor is defined on a different complex")
    C = ChainComplexOfSheaf(K, F, rel)
    return C


def relative_sequence(K: DeltaComplex, F, rel: str = "delta") -> dict:
    """Long exact sequence of the pair (B, A) with A the flagged subcomplex.

    Reports the Betti numbers of A, B and (B, A), the alternating rank sum
    around the sequence (zero when it is exact over Q) and, per degree, the
    Smith divisors of H_k(B) -> H_k(B, A) on free parts. Divisors all equal to
    one mean the image is saturated, so the cokernel is free.
    """
    sub = sorted(_rel_set(K, rel))
    CA = ChainComplexOfSheaf(K, F, None, sub)
    CB = chain_complex(K, F)
    CR = chain_complex(K, F, rel)
    HA, HB, HR = homology(CA), homology(CB), homology(CR)
    top = K.n + 1
    b = {name: [H[k].betti if k < len(H) else 0 for k in range(top)]
         for name, H in (("sub", HA), ("absolute", HB), ("relative", HR))}
    alt = sum((-1) ** k * (b["sub"][k] - b["absolute"][k] + b["relative"][k]) for k in range(top))
    excluded = _rel_set(K, rel)
    maps = {}
    for k in range(top):
        gens = HB[k].free_gens if k < len(HB) else []
        cols = []
        for g in gens:
            cells = {s: v for s, v in CB.cells_from_chain(k, g).items() if s not in excluded}
            cols.append(HR[k].coordinates(CR.chain_from_cells(k, cells)))
        if cols and HR[k].betti:
            divisors = smith_divisors(ExactMatrix.from_columns(cols, HR[k].betti))
        else:
            divisors = ()
        maps[k] = {"rank": len(divisors), "divisors": divisors,
                   "cokernel_rank": b["relative"][k] - len(divisors)}
    return {"betti": b, "alternating_sum": alt, "inclusion": maps,
            "sub_torsion": [h.torsion for h in HA]}


def star_homology(K: DeltaComplex, F, tau, degrees=None, field="Z") -> list[HomologyGroup]:
    """Homology of the chains supported in the closed star of tau."""
    st = closed_star(K, tuple(tau))
    C = ChainComplexOfSheaf(K, F, None, st.members)
    return homology(C, field, degrees, representatives=False)


# ---------------------------------------------------------------- subdivision

def subdivide_system(L):
    """Local system on the barycentric subdivision: children inherit parent frames."""
    from .local_system import LocalSystem
    K = L.base
    Kb, carrier = barycentric_subdivision(K)
    trans = {}
    for f in Kb.simplices[Kb.n - 1]:
        cs = Kb.cofaces(f)
        if len(cs) != 2:
            continue
        a, b = cs
        pa, pb = carrier[a], carrier[b]
        if pa != pb:
            M = L.t(pa, pb)
            if M != L._ident:
                trans[(a, b)] = M
    bases = []
    for bc in L.base_cells:
        bases.append(min(c for c in Kb.top if carrier[c] == bc))
    return LocalSystem(Kb, L.rank, trans, bases), carrier


def barycentric_invariance_check(K: DeltaComplex, F, degrees=None, field="Z") -> dict:
    """Compare homology before and after one barycentric subdivision."""
    from .constructible_sheaf import SheafFunctor
    before = homology(chain_complex(K, F), field, degrees, representatives=False)
    Lb, _ = subdivide_system(F.L)
    Fb = SheafFunctor(Lb, F.p, "closed", field, F.dual)
    after = homology(chain_complex(Lb.base, Fb), field, degrees, representatives=False)
    rows = []
    ok = True
    for h0, h1 in zip(before, after):
        same = h0.invariants() == h1.invariants()
        ok &= same
        rows.append((h0.degree, h0.invariants(), h1.invariants(), same))
    return {"ok": ok, "rows": rows}


# ---------------------------------------------------------------- double complex

def double_complex_total(K: DeltaComplex, F, field: str = "Z") -> GradedComplex:
    """Total complex of the closed-star double complex.

    Column j is the direct sum over j-simplices tau of the chains of the closed
    star of tau. The vertical differential is the ordinary boundary. The
    horizontal one goes from the star of tau to the stars of its facets, which
    contain it, with the facet sign. Entries are (tau, sigma, k) with sigma in
    star(tau). Horizontal maps are inclusions of chains, so both differentials
    commute; the vertical one is twisted by (-1)^j.
    """
    stars = {}
    for dd in range(K.n + 1):
        for t in K.simplices[dd]:
            stars[t] = closed_star(K, t).members
    # index: total degree m = i + j
    index: dict[int, dict] = {}
    for t, mem in stars.items():
        j = len(t) - 1
        for s in mem:
            i = len(s) - 1
            r = F.rank(s)
            if r:
                blk = index.setdefault(i + j, {})
                blk[(t, s)] = None
    dims = []
    for m in range(2 * K.n + 1):
        blk = index.get(m, {})
        off = 0
        for key in sorted(blk, key=lambda ts: (len(ts[0]), ts[0], len(ts[1]), ts[1])):
            r = F.rank(key[1])
            blk[key] = (off, r)
            off += r
        index[m] = blk
        dims.append(off)
    d = {}
    for m in range(1, 2 * K.n + 1):
        M = SparseMatrix(dims[m - 1], dims[m])
        for (t, s), (o, r) in index[m].items():
            j = len(t) - 1
            i = len(s) - 1
            # vertical
            sgn_v = -1 if j % 2 else 1
            for k in range(len(s)):
                f = s[:k] + s[k + 1:]
                if not f:
                    continue
                tgt = index[m - 1].get((t, f))
                if tgt is None:
                    continue
                of, rf = tgt
                R = F.restriction(f, s)
                sg = sgn_v * (-1 if k % 2 else 1)
                for a in range(rf):
                    for b in range(r):
                        if R.entries[a][b]:
                            M.add(of + a, o + b, sg * R.entries[a][b])
            # horizontal
            for k in range(len(t)):
                g = t[:k] + t[k + 1:]
                if not g:
                    continue
                tgt = index[m - 1].get((g, s))
                if tgt is None:
                    continue
                of, rf = tgt
                sg = -1 if k % 2 else 1
                for b in range(r):
                    M.add(of + b, o + b, sg)
        d[m] = M
    return GradedComplex(dims, d)
