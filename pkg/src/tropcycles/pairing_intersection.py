"""Cap-product pairing, Ω-contraction and tropical intersection numbers.

Both sides of the pairing live on one complex K. A homology class is a chain
with closed-kind coefficients. A cohomology class is a vertex-star Čech cocycle
with open-kind coefficients of the dual system. Both are written in the same
anchor frames, so the pairing is the sum over q-simplices of stalk pairings.

The Poincaré–Lefschetz map used by the pairing route of the intersection number
sends a Čech q-cochain s on K to a chain on the barycentric subdivision K'. The
value s_tau is spread over the dual block of tau: the K'-simplices
(b tau, b tau_{q+1}, ..., b tau_n) for flags tau ⊂ tau_{q+1} ⊂ ... ⊂ tau_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

from .cech_cohomology import vertex_star_cech
from .constructible_sheaf import SheafFunctor
from .exact_algebra import (
    ExactMatrix, bareiss_det, determinant, smith_divisors, solve_integer,
    wedge_basis, wedge_product,
)
from .homology_engine import (
    ChainComplexOfSheaf, HomologyGroup, homology, subdivide_system,
)
from .local_system import LocalSystem, dual_system
from .simplicial_complex import DeltaComplex, Simplex, _flag_sign


class PairingError(ValueError):
    pass


# ---------------------------------------------------------------- pairing matrix

@dataclass
class PairingReport:
    gram: ExactMatrix
    homology_rank: int
    cohomology_rank: int
    homology_torsion: tuple
    cohomology_torsion: tuple
    divisors: tuple
    perfect_over_Q: bool
    perfect_over_Z: bool
    p: int = 0
    q: int = 0

    def as_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "gram": self.gram.tolist(),
                "homology_rank": self.homology_rank, "cohomology_rank": self.cohomology_rank,
                "homology_torsion": list(self.homology_torsion),
                "cohomology_torsion": list(self.cohomology_torsion),
                "divisors": list(self.divisors),
                "perfect_over_Q": self.perfect_over_Q, "perfect_over_Z": self.perfect_over_Z}


def kronecker(chain_cells: dict, cochain_cells: dict) -> int:
    """Σ over simplices of the stalk pairing of chain and cochain values."""
    total = 0
    for s, a in chain_cells.items():
        b = cochain_cells.get(s)
        if b is not None:
            if len(a) != len(b):
                raise PairingError("chain and cochain coefficients have different ranks")
            total += sum(x * y for x, y in zip(a, b))
    return total


def pairing_matrix(K: DeltaComplex, L: LocalSystem, p: int, q: int,
                   hom: HomologyGroup | None = None, coh: HomologyGroup | None = None,
                   field: str = "Z") -> PairingReport:
    """Gram matrix of H_q(B; ι_*∧^pΛ) against H^q(B; ι_*∧^pΛ̌)."""
    if L.base is not K:
        raise PairingError("local system lives on a different complex")
    if not 0 <= q <= K.n or not 0 <= p <= L.rank:
        raise PairingError("degree out of range")
    F = SheafFunctor(L, p, "closed")
    C = ChainComplexOfSheaf(K, F)
    D = dual_system(L)
    Fo = SheafFunctor(D, p, "open", dual=True)
    Z = vertex_star_cech(K, Fo)
    if hom is None:
        hom = homology(C, "Z", degrees=[q])[0]
    if coh is None:
        coh = homology(Z, "Z", degrees=[q])[0] if q <= Z.top else None
    hgens = [C.cells_from_chain(q, g) for g in hom.free_gens]
    cgens = [Z.cells_from_cochain(q, g) for g in coh.free_gens] if coh else []
    for g in hom.free_gens:
        if q > 0 and C.boundary_of(q, g):
            raise PairingError("homology representative is not a cycle")
    for g in (coh.free_gens if coh else []):
        if q in Z.d and Z.d[q].apply(g):
            raise PairingError("cohomology representative is not a cocycle")
    rows = [[kronecker(h, c) for c in cgens] for h in hgens]
    G = ExactMatrix(rows, len(hgens), len(cgens))
    return _report(G, hom, coh, p, q)


def _report(G: ExactMatrix, hom, coh, p, q) -> PairingReport:
    divs = tuple(smith_divisors(G)) if G.rows and G.cols else ()
    square = G.rows == G.cols
    nonsing = square and (G.rows == 0 or bareiss_det(G.entries) != 0)
    perfect_z = square and (G.rows == 0 or all(abs(d) == 1 for d in divs) and len(divs) == G.rows)
    return PairingReport(G, G.rows, G.cols, tuple(hom.torsion) if hom else (),
                         tuple(coh.torsion) if coh else (), divs, nonsing, perfect_z, p, q)


# ---------------------------------------------------------------- Ω contraction

def contraction_matrix(n: int, p: int, Omega: int = 1) -> ExactMatrix:
    """ξ ↦ (ξ ∧ −)/Ω from ∧^p to the dual of ∧^{n-p}, in lex and dual-lex bases."""
    src, dst = wedge_basis(n, p), wedge_basis(n, n - p)
    cols = []
    for i in range(len(src)):
        xi = [int(k == i) for k in range(len(src))]
        col = []
        for j in range(len(dst)):
            eta = [int(k == j) for k in range(len(dst))]
            col.append(wedge_product(xi, p, eta, n - p, n)[0] * Omega)
        cols.append(col)
    return ExactMatrix.from_columns(cols, len(dst))


def orientation_sign(L: LocalSystem) -> int:
    """+1 when all transitions preserve e_1∧...∧e_n; raises otherwise."""
    for a, b, M in L.explicit_transitions():
        if determinant(M) != 1:
            raise PairingError(f"transition {a}->{b} reverses orientation; no global Ω")
    return 1


@dataclass
class OmegaContraction:
    """Per-simplex lattice isomorphisms A_tau(∧^pΛ) -> A_tau(∧^{n-p}Λ̌)."""
    source: SheafFunctor
    target: SheafFunctor
    maps: dict = field(default_factory=dict)
    ambient: ExactMatrix | None = None

    def __call__(self, tau: Simplex) -> ExactMatrix:
        return self.maps[tuple(tau)]

    def inverse_ambient(self) -> ExactMatrix:
        # signed permutation: the inverse is the transpose
        return self.ambient.T


def omega_contraction(F: SheafFunctor, Omega: int = 1) -> OmegaContraction:
    """Contract with Ω simplex by simplex and check that each map is a lattice iso."""
    L = F.L
    orientation_sign(L)
    n, p = L.rank, F.p
    G = SheafFunctor(dual_system(L), n - p, F.kind, F.field, dual=True)
    A = contraction_matrix(n, p, Omega)
    out = OmegaContraction(F, G, ambient=A)
    for tau in F.complex.all_simplices():
        src, dst = F.lattice(tau), G.lattice(tau)
        if src.rank != dst.rank:
            raise PairingError(f"rank mismatch at {tau}: {src.rank} vs {dst.rank}")
        cols = []
        for v in src.vectors():
            c = dst.coordinates(A.apply(v))
            if c is None:
                raise PairingError(f"contraction leaves the target lattice at {tau}")
            cols.append(c)
        M = ExactMatrix.from_columns(cols, dst.rank)
        if M.rows and abs(determinant(M)) != 1:
            raise PairingError(f"contraction is not unimodular at {tau}")
        out.maps[tau] = M
    return out


# ---------------------------------------------------------------- local formula

def eps_sign(basis_V: Sequence[Sequence[int]], basis_W: Sequence[Sequence[int]],
             orientation: int = 1, n: int | None = None) -> int:
    """Sign of det[basis_V | basis_W] times the ambient orientation (0 if singular)."""
    vs = [list(v) for v in basis_V] + [list(w) for w in basis_W]
    if n is None:
        n = len(vs[0]) if vs else 0
    if len(vs) != n or any(len(v) != n for v in vs):
        raise PairingError("tangent bases must have complementary sizes")
    if n == 0:
        return orientation
    cols = [[Fraction(v[i]) for v in vs] for i in range(n)]
    d = _det_frac(cols)
    return ((d > 0) - (d < 0)) * orientation


def _det_frac(m):
    m = [row[:] for row in m]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return det


@dataclass
class IntersectionPoint:
    tangent_V: list
    tangent_W: list
    xi_V: list
    xi_W: list
    label: str = ""

    def __post_init__(self):
        n = len(self.tangent_V[0]) if self.tangent_V else len(self.tangent_W[0])
        if len(self.tangent_V) + len(self.tangent_W) != n:
            raise PairingError("tangent spaces are not of complementary dimension")


def intersection_number(points: Sequence[IntersectionPoint], Omega: int = 1) -> int:
    """Σ_x ε(T_V, T_W)·(ξ_V ∧ ξ_W)/Ω."""
    total = 0
    for x in points:
        n = len(x.tangent_V[0]) if x.tangent_V else len(x.tangent_W[0])
        p = next(k for k in range(n + 1) if comb(n, k) == len(x.xi_V) and comb(n, n - k) == len(x.xi_W))
        eps = eps_sign(x.tangent_V, x.tangent_W, 1, n)
        w = wedge_product([int(v) for v in x.xi_V], p, [int(v) for v in x.xi_W], n - p, n)[0]
        total += eps * w * Omega
    return total


# ---------------------------------------------------------------- pairing route

# Global sign of the dual-block map relative to the intersection product. It is
# fixed once by a transverse pair on a torus without singularities (see tests).
DUALITY_SIGN = 1


class DualBlockMap:
    """Chain-level map from vertex-star Čech cochains on K to chains on K'."""

    def __init__(self, L: LocalSystem, p: int):
        K = L.base
        K.orient()
        orientation_sign(L)
        self.L, self.K, self.p = L, K, p
        self.Lb, self.carrier = subdivide_system(L)
        self.Kb = self.Lb.base
        if self.Kb.orientation is None:
            raise PairingError("subdivision lost the orientation")
        self.order = K.all_simplices()
        self.F_open = SheafFunctor(L, p, "open")
        self.Fb = SheafFunctor(self.Lb, p, "closed")
        self._blocks = {}
        for top in self.Kb.top:
            o = self.Kb.orientation[top]
            chain = [self.order[v] for v in top]
            for q in range(K.n + 1):
                tau = chain[q]
                front = top[:q + 1]
                e = o * _flag_sign(K, self.Kb, front, tau)
                rho = top[q:]
                key = (tau, rho)
                if key in self._blocks and self._blocks[key] != e:
                    raise PairingError(f"inconsistent dual block sign on {rho}")
                self._blocks[key] = e
        self._by_tau: dict = {}
        for (tau, rho), e in sorted(self._blocks.items()):
            self._by_tau.setdefault(tau, []).append((rho, e))
        # full flags of each old simplex, i.e. its pieces in K'
        self._pieces: dict = {}
        for rho in self.Kb.all_simplices():
            if [len(self.order[v]) for v in rho] == list(range(1, len(rho) + 1)):
                self._pieces.setdefault(self.order[rho[-1]], []).append(rho)

    def frame_change(self, tau: Simplex, rho: Simplex, k: int) -> ExactMatrix:
        """Anchor frame of tau in K (inside star(tau)) to anchor frame of rho in K'."""
        L, Lb = self.L, self.Lb
        ab = Lb.anchor(rho)
        P = self.carrier[ab]
        M = Lb._ginv[ab] @ L._g[P] @ L.star_transport(tau, L.anchor(tau), P)
        return L.wedge(M, k)

    def apply(self, q: int, cells: dict) -> dict:
        out: dict = {}
        for tau, vec in cells.items():
            for rho, e in self._by_tau.get(tau, []):
                if len(rho) != self.K.n - q + 1:
                    continue
                w = self.frame_change(tau, rho, self.p).apply(list(vec))
                acc = out.setdefault(rho, [0] * len(w))
                for i, x in enumerate(w):
                    acc[i] += e * x
        return {r: v for r, v in out.items() if any(v)}

    def chain_map_signs(self) -> dict:
        """Per cochain degree q, the sign c with ∂Φ(s) = c·Φ(δs) modulo ∂B' (raises if none)."""
        Z = vertex_star_cech(self.K, self.F_open)
        Cb = ChainComplexOfSheaf(self.Kb, self.Fb, "boundary")
        n, bd = self.K.n, self.Kb.boundary
        out = {}
        for q in range(n):
            found = set()
            for j in range(Z.dims[q]):
                s = {j: 1}
                phi = {k: v for k, v in self.apply(q, Z.cells_from_cochain(q, s)).items() if k not in bd}
                ds = Z.cells_from_cochain(q + 1, Z.d[q].apply(s)) if q in Z.d else {}
                phid = {k: v for k, v in self.apply(q + 1, ds).items() if k not in bd}
                a = Cb.boundary_of(n - q, Cb.chain_from_cells(n - q, phi))
                b = Cb.chain_from_cells(n - q - 1, phid)
                if a == b and not a:
                    continue
                if a == b:
                    found.add(1)
                elif a == {k: -v for k, v in b.items()}:
                    found.add(-1)
                else:
                    raise PairingError(f"dual block map is not a chain map in degree {q}")
            if len(found) > 1:
                raise PairingError(f"dual block map has mixed signs in degree {q}")
            out[q] = found.pop() if found else 1
        return out

    def subdivide_chain(self, cells: dict) -> dict:
        """Barycentric subdivision of a chain on K with closed-kind coefficients."""
        K, Kb = self.K, self.Kb
        out: dict = {}
        for s, vec in cells.items():
            s = tuple(s)
            for rho in self._pieces.get(s, []):
                sg = _flag_sign(K, Kb, rho, s)
                w = self.frame_change(s, rho, self.p).apply(list(vec))
                acc = out.setdefault(rho, [0] * len(w))
                for i, x in enumerate(w):
                    acc[i] += sg * x
        return {r: v for r, v in out.items() if any(v)}


_DB_CACHE: dict = {}


def _dual_block_map(L: LocalSystem, p: int) -> DualBlockMap:
    key = (id(L), p)
    hit = _DB_CACHE.get(key)
    if hit is None or hit[0] is not L:
        hit = (L, DualBlockMap(L, p))
        if len(_DB_CACHE) > 16:
            _DB_CACHE.clear()
        _DB_CACHE[key] = hit
    return hit[1]


class _DualityContext:
    """Homology of K' rel boundary and the images of the Čech generators."""

    def __init__(self, L: LocalSystem, p: int, qW: int, field: str):
        K = L.base
        self.q = K.n - qW
        self.qW = qW
        self.DB = DB = _dual_block_map(L, p)
        self.Cb = ChainComplexOfSheaf(DB.Kb, DB.Fb, "boundary")
        self.Hb = homology(self.Cb, field, degrees=[qW])[0]
        Z = vertex_star_cech(K, DB.F_open)
        Hz = homology(Z, field, degrees=[self.q])[0]
        self.gens = [Z.cells_from_cochain(self.q, g) for g in Hz.free_gens]
        self.cols = [self.rel_coords(DB.apply(self.q, g)) for g in self.gens]

    def rel_coords(self, cells):
        cells = {s: v for s, v in cells.items() if s not in self.DB.Kb.boundary}
        ch = self.Cb.chain_from_cells(self.qW, cells)
        if self.qW > 0 and self.Cb.boundary_of(self.qW, ch):
            raise PairingError("chain is not a relative cycle")
        return self.Hb.coordinates(ch)


_PD_CACHE: dict = {}


def _duality_context(L: LocalSystem, p: int, qW: int, field: str) -> _DualityContext:
    key = (id(L), p, qW, field)
    hit = _PD_CACHE.get(key)
    if hit is None or hit[0] is not L:
        hit = (L, _DualityContext(L, p, qW, field))
        if len(_PD_CACHE) > 16:
            _PD_CACHE.clear()
        _PD_CACHE[key] = hit
    return hit[1]


def poincare_dual_cocycle(L: LocalSystem, W, field: str = "Z") -> tuple[dict, int]:
    """A vertex-star cocycle whose dual block chain is homologous to W rel ∂B.

    W is a TropicalCycle with coefficients in ∧^{p'}Λ of degree q'. Returns the
    cocycle cells (degree n - q') and the number of cohomology generators used.
    Only free classes are matched; torsion pairs to zero with free classes.
    """
    ctx = _duality_context(L, W.p, W.q, field)
    target = ctx.rel_coords(ctx.DB.subdivide_chain(W.cells))
    gens, cols = ctx.gens, ctx.cols
    if not cols:
        if any(target):
            raise PairingError("cycle is not in the image of the duality map")
        return {}, 0
    x = solve_integer(ExactMatrix.from_columns(cols, len(target)), target)
    if x is None:
        raise PairingError("cycle is not in the image of the duality map")
    out: dict = {}
    for c, g in zip(x, gens):
        for s, v in g.items():
            acc = out.setdefault(s, [0] * len(v))
            for i, y in enumerate(v):
                acc[i] += c * y
    return {s: v for s, v in out.items() if any(v)}, len(gens)


def intersection_via_pairing(L: LocalSystem, V, W, Omega: int = 1) -> int:
    """V·W as the pairing of V with the Ω-contracted Poincaré dual of W."""
    n = L.base.n
    if V.p + W.p != n or V.q + W.q != n:
        raise PairingError("cycles are not of complementary degrees")
    b, _ = poincare_dual_cocycle(L, W)
    total = 0
    for tau, a in V.cells.items():
        bt = b.get(tuple(tau))
        if bt is None:
            continue
        total += wedge_product(list(a), V.p, bt, W.p, n)[0] * Omega
    return DUALITY_SIGN * total


def zharkov_sign(n: int, p: int, q: int) -> int:
    """(-1)^{(n-p)(q-1)}, relating V·W to the topological intersection on the total space."""
    return -1 if ((n - p) * (q - 1)) % 2 else 1


# ---------------------------------------------------------------- lattice invariants

def gram_lattice_classify(G) -> dict:
    """Rank, determinant, parity and signature of a symmetric integer matrix."""
    G = G if isinstance(G, ExactMatrix) else ExactMatrix([list(r) for r in G], len(G), len(G[0]) if G else 0)
    if G.rows != G.cols or G != G.T:
        raise PairingError("gram matrix is not symmetric")
    n = G.rows
    det = bareiss_det(G.entries) if n else 1
    even = all(G.entries[i][i] % 2 == 0 for i in range(n))
    pos, neg, zero = _inertia([[Fraction(x) for x in r] for r in G.entries])
    return {"rank": n, "det": det, "unimodular": abs(det) == 1, "even": even,
            "parity": "even" if even else "odd", "signature": (pos, neg), "nullity": zero}


def _inertia(m):
    """Sylvester inertia by symmetric Gaussian elimination over Q."""
    m = [r[:] for r in m]
    n = len(m)
    pos = neg = 0
    active = list(range(n))
    while active:
        i = next((k for k in active if m[k][k] != 0), None)
        if i is None:
            pair = next(((a, b) for a in active for b in active if a < b and m[a][b] != 0), None)
            if pair is None:
                break
            a, b = pair
            # congruence: row/col a += row/col b makes the diagonal 2 m[a][b] (+ m[b][b] = 0)
            for k in range(n):
                m[a][k] += m[b][k]
            for k in range(n):
                m[k][a] += m[k][b]
            continue
        piv = m[i][i]
        if piv > 0:
            pos += 1
        else:
            neg += 1
        active.remove(i)
        for r in active:
            f = m[r][i] / piv
            if f:
                for k in range(n):
                    m[r][k] -= f * m[i][k]
        for r in active:
            m[i][r] = m[r][i] = Fraction(0)
    return pos, neg, n - pos - neg
