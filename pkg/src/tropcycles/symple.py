"""Symple local models as triangulated balls.

A lattice simplex (or polygon) P contributes a *fan factor*: the cone over the
boundary of the polar polytope. Its top simplices are the maximal cones of the
normal fan, one per vertex of P, and a simplex lies on the codimension-one
skeleton Y iff it uses at most dim P - 1 rays. The model is the product
X_P × X_P̌ × I^c with the staircase triangulation and discriminant Y × Y̌ × I^c.

Each top cell carries the chart of its x-chamber. Crossing an x-wall from the
chamber of vertex v to that of w inside the y-chamber of the dual vertex ň
applies dx ↦ dx - <dy, ň>(w - v). The loop around a wall pair then composes
to v ↦ v + <v, n> m with m, n the corresponding edge vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

from .exact_algebra import ExactMatrix, rank as rank_of
from .local_system import transvection
from .simplicial_complex import DeltaComplex, Simplex, faces_of


class SympleError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSimplex:
    """Affinely independent lattice points spanning their ambient space."""

    vertices: tuple

    def __post_init__(self):
        vs = tuple(tuple(int(x) for x in v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        if len(vs) < 2:
            raise SympleError("a lattice simplex needs at least two vertices")
        d = len(vs[0])
        if any(len(v) != d for v in vs) or d != len(vs) - 1:
            raise SympleError("vertices must span an ambient space of their own dimension")
        diffs = [[a - b for a, b in zip(v, vs[0])] for v in vs[1:]]
        if rank_of(ExactMatrix(diffs, d, d)) != d:
            raise SympleError("vertices are not affinely independent")

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    @classmethod
    def standard(cls, d: int) -> "LatticeSimplex":
        return cls([tuple(0 for _ in range(d))] + [tuple(int(i == j) for j in range(d)) for i in range(d)])

    @classmethod
    def interval(cls, length: int = 1) -> "LatticeSimplex":
        return cls([(0,), (length,)])

    def fan(self) -> "FanFactor":
        d = self.dim
        coords = [tuple(0 for _ in range(d))]
        for r in range(d):
            coords.append(tuple(int(k == r) for k in range(d)))
        coords.append(tuple(-1 for _ in range(d)))
        tops = {}
        for i in range(d + 1):
            tops[(0,) + tuple(1 + r for r in range(d + 1) if r != i)] = i
        return FanFactor(d, coords, tops)


@dataclass(frozen=True)
class LatticePolygon:
    """Convex lattice polygon with vertices in counter-clockwise order."""

    vertices: tuple

    def __post_init__(self):
        vs = tuple(tuple(int(x) for x in v) for v in self.vertices)
        object.__setattr__(self, "vertices", vs)
        N = len(vs)
        if N < 3 or any(len(v) != 2 for v in vs):
            raise SympleError("a polygon needs at least three planar vertices")
        for i in range(N):
            a, b, c = vs[i], vs[(i + 1) % N], vs[(i + 2) % N]
            if (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) <= 0:
                raise SympleError("polygon vertices are not strictly convex and counter-clockwise")

    @property
    def dim(self) -> int:
        return 2

    def fan(self) -> "FanFactor":
        vs, N = self.vertices, len(self.vertices)
        coords = [(0, 0)]
        for r in range(N):
            e = [vs[(r + 1) % N][k] - vs[r][k] for k in range(2)]
            coords.append((e[1], -e[0]))
        tops = {}
        for i in range(N):
            tops[tuple(sorted((0, 1 + (i - 1) % N, 1 + i)))] = i
        return FanFactor(2, coords, tops)


class FanFactor:
    """Cone over the polar boundary: vertex 0 is the apex, the rest are rays."""

    def __init__(self, dim: int, coords: list, tops: dict):
        self.dim = dim
        self.coords = coords
        self.tops = tops

    def in_wall(self, verts) -> bool:
        return sum(1 for v in set(verts) if v != 0) <= self.dim - 1

    def chambers(self, verts) -> frozenset:
        vs = set(verts)
        return frozenset(lab for t, lab in self.tops.items() if vs <= set(t))


class IntervalFactor:
    """Trivial factor: an interval cut into two edges."""

    dim = 1

    def __init__(self):
        self.coords = [(-1,), (0,), (1,)]
        self.tops = {(0, 1): None, (1, 2): None}


def _shuffles(dims: Sequence[int]):
    moves = [k for k, d in enumerate(dims) for _ in range(d)]
    return sorted(set(permutations(moves)))


def product_complex(factors):
    """Staircase triangulation of a product of ordered complexes.

    Returns (tops, vertex tuples, projections) where projections[c] is the
    tuple of factor top simplices containing c.
    """
    dims = [f.dim for f in factors]
    shuffles = _shuffles(dims)
    combos = [[]]
    for f in factors:
        combos = [c + [t] for c in combos for t in f.tops]
    verts: set = set()
    raw = []
    for combo in combos:
        for sh in shuffles:
            idx = [0] * len(factors)
            chain = [tuple(combo[k][0] for k in range(len(factors)))]
            for k in sh:
                idx[k] += 1
                chain.append(tuple(combo[j][idx[j]] for j in range(len(factors))))
            raw.append((chain, tuple(combo)))
            verts.update(chain)
    order = sorted(verts)
    vid = {v: i for i, v in enumerate(order)}
    tops, proj = [], {}
    for chain, combo in raw:
        c = tuple(vid[v] for v in chain)
        tops.append(c)
        proj[c] = combo
    return tops, order, proj


@dataclass
class SympleModelSpec:
    """Polytope pair and trivial factor count, with the stratum transvections."""

    triangle: object
    cotriangle: object
    c: int = 0

    def __post_init__(self):
        for P in (self.triangle, self.cotriangle):
            if not isinstance(P, (LatticeSimplex, LatticePolygon)):
                raise SympleError("model factors must be lattice simplices or polygons")
        if self.c < 0:
            raise SympleError("the trivial factor count is negative")
        if self.triangle.dim < 1 or self.cotriangle.dim < 1:
            raise SympleError("both polytopes need dimension at least one")

    @property
    def a(self) -> int:
        return self.triangle.dim

    @property
    def b(self) -> int:
        return self.cotriangle.dim

    @property
    def n(self) -> int:
        return self.a + self.b + self.c

    def m_vector(self, i: int, j: int) -> list:
        v = self.triangle.vertices
        return [v[j][k] - v[i][k] for k in range(self.a)] + [0] * (self.b + self.c)

    def n_vector(self, k: int, l: int) -> list:
        w = self.cotriangle.vertices
        return [0] * self.a + [w[l][s] - w[k][s] for s in range(self.b)] + [0] * self.c

    def transvection(self, i: int, j: int, k: int, l: int) -> ExactMatrix:
        """Monodromy v ↦ v + <v, n> m for the x-wall (i, j) and y-wall (k, l)."""
        return transvection(self.m_vector(i, j), self.n_vector(k, l))

    def shear(self, i: int, j: int, k: int) -> ExactMatrix:
        """Chart change from x-chamber i to x-chamber j inside y-chamber k."""
        m = self.m_vector(i, j)
        w = self.cotriangle.vertices[k]
        nk = [0] * self.a + [-x for x in w] + [0] * self.c
        return transvection(m, nk)

    @property
    def edge_data(self) -> dict:
        """Transvection per (x-wall, y-wall) pair of polytope edges."""
        out = {}
        for (i, j) in _edges(self.triangle):
            for (k, l) in _edges(self.cotriangle):
                out[((i, j), (k, l))] = self.transvection(i, j, k, l)
        return out

    def label(self) -> str:
        def poly(P):
            return ";".join(",".join(str(x) for x in v) for v in P.vertices)
        return f"symple[{poly(self.triangle)}]x[{poly(self.cotriangle)}]c{self.c}"


def _edges(P) -> list:
    N = len(P.vertices)
    if isinstance(P, LatticePolygon):
        return [(i, (i + 1) % N) for i in range(N)]
    return [(i, j) for i in range(N) for j in range(i + 1, N)]


def codim2_ring(K: DeltaComplex, s: Simplex) -> list | None:
    """Cyclically ordered top cells around an interior codim-2 simplex."""
    cells = K.top_cofaces(s)
    if not cells:
        return None
    adj: dict = {c: [] for c in cells}
    for c in cells:
        for f in faces_of(c, len(c) - 2):
            if set(s) <= set(f):
                for c2 in K.cofaces(f):
                    if c2 != c:
                        adj[c].append(c2)
    if any(len(v) != 2 for v in adj.values()):
        return None
    ring = [cells[0]]
    prev, cur = None, cells[0]
    while True:
        nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
        if nxt == ring[0]:
            break
        ring.append(nxt)
        prev, cur = cur, nxt
    if len(ring) != len(cells):
        return None
    return ring
