"""Integer local systems on the complement of the discriminant.

A local system is given by matrices on the edges of the dual graph (pairs of top
simplices sharing a facet). The matrix t on the edge c1 -> c2 converts
coordinates: v_{c2} = t · v_{c1}. Transport along a walk is the ordered product,
so a loop's monodromy is read right to left.

Frames. Every top cell c gets the tree transport g_c from the base cell of its
component along a BFS spanning tree. In these gauge-fixed coordinates a transition
becomes D_e = g_{c2}^{-1} t_e g_{c1}, which is the identity on tree edges. Each
simplex tau is described in the frame of its anchor, the first top simplex
containing it. Moving a vector from one top cell to another inside the star of
tau uses a path in that star. The result does not depend on the path when the
vector is invariant under the star's monodromy.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

from .exact_algebra import (
    ExactMatrix, Lattice, as_matrix, determinant, exterior_power_matrix,
    inverse_unimodular, kernel_lattice,
)
from .simplicial_complex import DeltaComplex, DualGraph, Simplex, dual_graph


class LocalSystemError(ValueError):
    pass


class MonodromyGenerators:
    """Loop transports based at one top cell, in that cell's gauge-fixed frame."""

    def __init__(self, base: Simplex, loops: list[ExactMatrix], rank: int):
        self.base = base
        self.loops = loops
        self.rank = rank

    def __len__(self):
        return len(self.loops)

    def __iter__(self):
        return iter(self.loops)


class LocalSystem:
    def __init__(self, base: DeltaComplex, rank: int,
                 transitions: dict | None = None, base_cells: Sequence[Simplex] | None = None):
        self.base = base
        self.rank = rank
        self.graph: DualGraph = dual_graph(base)
        ident = ExactMatrix.identity(rank)
        self._t: dict[tuple[Simplex, Simplex], ExactMatrix] = {}
        edge_set = {(a, b) for _, a, b in self.graph.edges}
        for (c1, c2), M in (transitions or {}).items():
            c1, c2 = tuple(c1), tuple(c2)
            M = as_matrix(M)
            if (M.rows, M.cols) != (rank, rank):
                raise LocalSystemError(f"transition {c1}->{c2} has wrong shape")
            if determinant(M) not in (1, -1):
                raise LocalSystemError(f"transition {c1}->{c2} is not in GL_n(Z)")
            if (c1, c2) not in edge_set and (c2, c1) not in edge_set:
                raise LocalSystemError(f"{c1} and {c2} are not adjacent top cells")
            inv = inverse_unimodular(M)
            for key, val in (((c1, c2), M), ((c2, c1), inv)):
                if key in self._t and self._t[key] != val:
                    raise LocalSystemError(f"inconsistent transitions on {c1}<->{c2}")
                self._t[key] = val
        self._ident = ident
        comps = self.graph.components()
        if base_cells is None:
            base_cells = [comp[0] for comp in comps]
        self.base_cells = [tuple(b) for b in base_cells]
        # spanning forest and gauge transports
        self.tree_parent: dict[Simplex, tuple[Simplex, Simplex] | None] = {}
        self._g: dict[Simplex, ExactMatrix] = {}
        self._ginv: dict[Simplex, ExactMatrix] = {}
        for b in self.base_cells:
            par = self.graph.bfs_tree(b)
            for c, pf in par.items():
                self.tree_parent[c] = pf
                if pf is None:
                    self._g[c], self._ginv[c] = ident, ident
                else:
                    p = pf[0]
                    self._g[c] = self.t(p, c) @ self._g[p]
                    self._ginv[c] = self._ginv[p] @ self.t(c, p)
        missing = [c for c in self.graph.nodes if c not in self._g]
        if missing:
            raise LocalSystemError("base cells do not reach every component")
        self._D: dict[tuple[Simplex, Simplex], ExactMatrix] = {}
        self._star_cache: dict = {}
        self._wedge_cache: dict = {}

    # ---------------------------------------------------------------- raw data
    def t(self, c1: Simplex, c2: Simplex) -> ExactMatrix:
        return self._t.get((c1, c2), self._ident)

    @property
    def transitions(self) -> dict:
        return dict(self._t)

    def explicit_transitions(self) -> list[tuple[Simplex, Simplex, ExactMatrix]]:
        """Non-identity transitions, one per unordered edge (smaller cell first)."""
        out = []
        for _, a, b in self.graph.edges:
            M = self.t(a, b)
            if M != self._ident:
                out.append((a, b, M))
        return out

    def gauge(self, c: Simplex) -> ExactMatrix:
        return self._g[c]

    def D(self, c1: Simplex, c2: Simplex) -> ExactMatrix:
        """Gauge-fixed transition c1 -> c2."""
        key = (c1, c2)
        if key not in self._D:
            self._D[key] = self._ginv[c2] @ self.t(c1, c2) @ self._g[c1]
        return self._D[key]

    def anchor(self, tau: Sequence[int]) -> Simplex:
        cs = self.base.top_cofaces(tuple(tau))
        if not cs:
            raise LocalSystemError(f"simplex {tau} lies in no top cell")
        return cs[0]

    # ---------------------------------------------------------------- stars
    def _star(self, omega: Simplex):
        """Local BFS tree data of the star of omega, rooted at its anchor.

        Returns (root, P, Pinv, nontree) with P[c] the gauge-fixed transport from
        root to c along the tree and nontree the list of (a, b) edges off it.
        """
        omega = tuple(omega)
        hit = self._star_cache.get(omega)
        if hit is not None:
            return hit
        K = self.base
        cells = K.top_cofaces(omega)
        cs = set(cells)
        root = cells[0]
        adj: dict[Simplex, list[Simplex]] = {c: [] for c in cells}
        edges = []
        for c in cells:
            for i in range(len(c)):
                f = c[:i] + c[i + 1:]
                if f in K.boundary:
                    continue
                for c2 in K.cofaces(f):
                    if c2 != c and c2 in cs:
                        adj[c].append(c2)
                        if c < c2:
                            edges.append((c, c2))
        P = {root: self._ident}
        Pinv = {root: self._ident}
        tree = set()
        order = [root]
        k = 0
        while k < len(order):
            c = order[k]
            k += 1
            for c2 in sorted(adj[c]):
                if c2 not in P:
                    P[c2] = self.D(c, c2) @ P[c]
                    Pinv[c2] = Pinv[c] @ self.D(c2, c)
                    tree.add((min(c, c2), max(c, c2)))
                    order.append(c2)
        nontree = [e for e in sorted(edges) if e not in tree and e[0] in P and e[1] in P]
        out = (root, P, Pinv, nontree)
        self._star_cache[omega] = out
        return out

    def star_transport(self, omega: Simplex, c_from: Simplex, c_to: Simplex) -> ExactMatrix:
        """Gauge-fixed transport between two top cells of star(omega) along the star tree."""
        _, P, Pinv, _ = self._star(omega)
        if c_from not in P or c_to not in P:
            raise LocalSystemError(f"cells not connected inside the star of {omega}")
        return P[c_to] @ Pinv[c_from]

    def wedge(self, M: ExactMatrix, p: int) -> ExactMatrix:
        key = (M, p)
        hit = self._wedge_cache.get(key)
        if hit is None:
            hit = exterior_power_matrix(M, p)
            self._wedge_cache[key] = hit
        return hit


def transport(L: LocalSystem, path: Sequence[Simplex]) -> ExactMatrix:
    """Ordered product of transitions along a walk of adjacent top cells."""
    M = ExactMatrix.identity(L.rank)
    path = [tuple(c) for c in path]
    K = L.base
    for a, b in zip(path, path[1:]):
        shared = tuple(sorted(set(a) & set(b)))
        if len(shared) != K.n or a == b:
            raise LocalSystemError(f"{a} and {b} do not share a facet")
        M = L.t(a, b) @ M
    return M


def star_monodromy(L: LocalSystem, omega: Sequence[int]) -> MonodromyGenerators:
    """One loop per non-tree edge of the dual graph of star(omega), based at its anchor."""
    omega = tuple(omega)
    root, P, Pinv, nontree = L._star(omega)
    loops = []
    for a, b in nontree:
        loops.append(Pinv[b] @ L.D(a, b) @ P[a])
    return MonodromyGenerators(root, loops, L.rank)


def invariant_lattice(gens: MonodromyGenerators | Iterable[ExactMatrix], p: int,
                      rank: int | None = None) -> Lattice:
    """Common fixed vectors of the p-th exterior powers of the generators."""
    mats = list(gens)
    n = gens.rank if isinstance(gens, MonodromyGenerators) else rank
    if n is None:
        if not mats:
            raise ValueError("rank needed when no generators are given")
        n = mats[0].rows
    from math import comb
    N = comb(n, p)
    if not mats:
        return Lattice.full(N)
    rows = []
    I = ExactMatrix.identity(N)
    for T in mats:
        W = exterior_power_matrix(T, p) - I
        rows.extend(W.entries)
    rows = [r for r in rows if any(r)]
    if not rows:
        return Lattice.full(N)
    return kernel_lattice(ExactMatrix(rows, len(rows), N))


def dual_system(L: LocalSystem) -> LocalSystem:
    """Transpose-inverse transitions."""
    trans = {}
    for a, b, M in L.explicit_transitions():
        trans[(a, b)] = inverse_unimodular(M).T
    return LocalSystem(L.base, L.rank, trans, L.base_cells)


def transvection(m: Sequence[int], n: Sequence[int]) -> ExactMatrix:
    """v -> v + <v, n> m."""
    k = len(m)
    return ExactMatrix([[int(i == j) + m[i] * n[j] for j in range(k)] for i in range(k)], k, k)


def focus_focus(m: Sequence[int]) -> ExactMatrix:
    """v -> v + det(m, v) m; conjugate to [[1,1],[0,1]] for primitive m."""
    a, b = m
    return transvection((a, b), (-b, a))
