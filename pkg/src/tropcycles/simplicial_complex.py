"""Ordered simplicial complexes with discriminant and boundary flags."""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Iterable, Sequence

from .exact_algebra import bareiss_det

Simplex = tuple  # ascending tuple of vertex indices


class ComplexError(ValueError):
    pass


def faces_of(s: Simplex, k: int | None = None):
    """All nonempty faces of s (or only those of dimension k)."""
    if k is not None:
        return list(combinations(s, k + 1))
    out = []
    for r in range(1, len(s) + 1):
        out.extend(combinations(s, r))
    return out


def facets_of(s: Simplex) -> list[Simplex]:
    return [s[:i] + s[i + 1:] for i in range(len(s))]


def boundary_sign(sigma: Simplex, tau: Simplex) -> int:
    """(-1)^i where i is the position of the vertex of sigma missing from tau."""
    sigma, tau = tuple(sigma), tuple(tau)
    if len(tau) != len(sigma) - 1:
        raise ComplexError(f"{tau} is not a facet of {sigma}")
    for i in range(len(sigma)):
        if sigma[:i] + sigma[i + 1:] == tau:
            return -1 if i % 2 else 1
    raise ComplexError(f"{tau} is not a facet of {sigma}")


class DeltaComplex:
    """Finite ordered simplicial complex.

    Vertices are the integers 0..V-1 in their total order; every simplex is an
    ascending tuple. ``delta`` and ``boundary`` are closed subcomplexes given as
    sets of simplices. ``coords`` optionally holds integer vertex coordinates and
    ``orientation`` a sign per top simplex.
    """

    def __init__(self, simplices: Iterable[Sequence[int]], dimension: int | None = None,
                 delta: Iterable[Sequence[int]] = (), boundary: Iterable[Sequence[int]] = (),
                 coords: Sequence[Sequence[int]] | None = None,
                 orientation: dict | None = None, close: bool = True,
                 check_codim: bool = True):
        cells = set()
        for s in simplices:
            t = tuple(s)
            if list(t) != sorted(set(t)):
                raise ComplexError(f"simplex {t} is not an ascending vertex tuple")
            if close:
                cells.update(faces_of(t))
            else:
                cells.add(t)
        top = max((len(s) - 1 for s in cells), default=-1)
        self.n = top if dimension is None else dimension
        self.simplices: list[list[Simplex]] = [[] for _ in range(self.n + 1)]
        for s in sorted(cells, key=lambda s: (len(s), s)):
            if len(s) - 1 > self.n:
                raise ComplexError(f"simplex {s} exceeds the dimension {self.n}")
            self.simplices[len(s) - 1].append(s)
        self.index = {s: i for d in self.simplices for i, s in enumerate(d)}
        verts = [s[0] for s in self.simplices[0]] if self.simplices else []
        if verts != list(range(len(verts))):
            raise ComplexError("vertices must be exactly 0..V-1")
        for s in cells:
            if len(s) > 1:
                for f in facets_of(s):
                    if f not in self.index:
                        raise ComplexError(f"face {f} of {s} missing")
        self.delta = frozenset(self._closed_flag(delta, "delta"))
        self.boundary = frozenset(self._closed_flag(boundary, "boundary"))
        if check_codim and any(len(s) - 1 > self.n - 2 for s in self.delta):
            raise ComplexError("discriminant must have codimension at least 2")
        self.coords = [tuple(c) for c in coords] if coords is not None else None
        if self.coords is not None and len(self.coords) != self.num(0):
            raise ComplexError("one coordinate vector per vertex required")
        # cofaces of each simplex, one dimension up
        self._cofaces: dict[Simplex, list[Simplex]] = {s: [] for s in self.index}
        for d in range(1, self.n + 1):
            for s in self.simplices[d]:
                for f in facets_of(s):
                    self._cofaces[f].append(s)
        self._top_of: dict[Simplex, list[Simplex]] | None = None
        self.orientation = dict(orientation) if orientation is not None else None

    def _closed_flag(self, items, name):
        out = set()
        for s in items:
            t = tuple(s)
            if t not in self.index:
                raise ComplexError(f"{name} simplex {t} is not in the complex")
            out.update(faces_of(t))
        return out

    # -------------------------------------------------------------- queries
    def num(self, d: int) -> int:
        return len(self.simplices[d]) if 0 <= d <= self.n else 0

    def all_simplices(self) -> list[Simplex]:
        return [s for d in self.simplices for s in d]

    def __contains__(self, s) -> bool:
        return tuple(s) in self.index

    def dim(self, s: Simplex) -> int:
        return len(s) - 1

    def facets(self, s: Simplex) -> list[Simplex]:
        return facets_of(s) if len(s) > 1 else []

    def cofaces(self, s: Simplex) -> list[Simplex]:
        return self._cofaces[tuple(s)]

    @property
    def top(self) -> list[Simplex]:
        return self.simplices[self.n]

    def top_cofaces(self, s: Simplex) -> list[Simplex]:
        """Top simplices containing s, in global order."""
        if self._top_of is None:
            acc: dict[Simplex, list[Simplex]] = {t: [] for t in self.index}
            for c in self.top:
                for f in faces_of(c):
                    acc[f].append(c)
            self._top_of = acc
        return self._top_of[tuple(s)]

    def in_delta(self, s) -> bool:
        return tuple(s) in self.delta

    def in_boundary(self, s) -> bool:
        return tuple(s) in self.boundary

    def is_pure(self) -> bool:
        return all(self.top_cofaces(s) for s in self.index)

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * self.num(d) for d in range(self.n + 1))

    def with_flags(self, delta=None, boundary=None) -> "DeltaComplex":
        return DeltaComplex(self.all_simplices(), self.n,
                            self.delta if delta is None else delta,
                            self.boundary if boundary is None else boundary,
                            self.coords, self.orientation)

    # -------------------------------------------------------------- orientation
    def orient(self, reference: dict | None = None) -> dict:
        """Coherent signs on top simplices.

        Propagates across interior facets so that the signed sum of top cells has
        no interior boundary. The sign of the first cell in each component is
        taken from ``reference`` or from vertex coordinates when their ambient
        dimension equals n, and is +1 otherwise.
        """
        if self.orientation is not None:
            return self.orientation
        o: dict[Simplex, int] = {}
        for start in self.top:
            if start in o:
                continue
            s0 = 1
            if reference and start in reference:
                s0 = reference[start]
            elif self.coords is not None and len(self.coords[0]) == self.n:
                s0 = self.geometric_sign(start) or 1
            o[start] = s0
            queue = deque([start])
            while queue:
                c = queue.popleft()
                for f in facets_of(c):
                    for c2 in self.cofaces(f):
                        if c2 == c:
                            continue
                        want = -o[c] * boundary_sign(c, f) * boundary_sign(c2, f)
                        if c2 in o:
                            if o[c2] != want:
                                raise ComplexError("complex is not orientable")
                        else:
                            o[c2] = want
                            queue.append(c2)
        self.orientation = o
        return o

    def geometric_sign(self, s: Simplex) -> int:
        """Sign of det(v1-v0, ..., vn-v0) for a top simplex with n-dim coordinates."""
        p = [self.coords[v] for v in s]
        m = [[p[i][k] - p[0][k] for k in range(len(p[0]))] for i in range(1, len(p))]
        d = bareiss_det(m)
        return (d > 0) - (d < 0)

    def barycenter(self, s: Simplex) -> tuple[Fraction, ...]:
        pts = [self.coords[v] for v in s]
        return tuple(Fraction(sum(c), len(pts)) for c in zip(*pts))


class StarComplex:
    """Closed star of a simplex: all faces of simplices containing it."""

    def __init__(self, center: Simplex, members: list[Simplex]):
        self.center = center
        self.members = members
        self._set = frozenset(members)

    def __contains__(self, s) -> bool:
        return tuple(s) in self._set

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def top_cells(self, K: DeltaComplex) -> list[Simplex]:
        return [s for s in self.members if len(s) == K.n + 1]


def closed_star(K: DeltaComplex, tau: Sequence[int]) -> StarComplex:
    tau = tuple(tau)
    if tau not in K.index:
        raise ComplexError(f"unknown simplex {tau}")
    mem = set()
    for c in K.top_cofaces(tau):
        mem.update(faces_of(c))
    if not mem:
        mem.update(faces_of(tau))
    return StarComplex(tau, sorted(mem, key=lambda s: (len(s), s)))


def open_star(K: DeltaComplex, tau: Sequence[int]) -> list[Simplex]:
    """Simplices whose closure contains tau."""
    tau = set(tau)
    return [s for s in K.all_simplices() if tau <= set(s)]


def open_star_intersection(K: DeltaComplex, vertices: Iterable[int]) -> Simplex | None:
    """Simplex spanned by the vertices if it exists (W_v1 ∩ ... ∩ W_vk = W_tau)."""
    s = tuple(sorted(set(vertices)))
    if not s:
        return None
    return s if s in K.index else None


def link(K: DeltaComplex, tau: Sequence[int]) -> list[Simplex]:
    tau = tuple(tau)
    st = closed_star(K, tau)
    ts = set(tau)
    return [s for s in st.members if not ts & set(s)]


def barycentric_subdivision(K: DeltaComplex) -> tuple[DeltaComplex, dict]:
    """First barycentric subdivision and the carrier map new simplex -> old simplex.

    New vertices are ordered by the dimension of their parent simplex, then by
    the parent's order, so old vertices keep their numbers.
    """
    order = K.all_simplices()  # already sorted by (dim, tuple)
    vid = {s: i for i, s in enumerate(order)}
    tops = []
    for c in K.top:
        for chain in _flags(c):
            tops.append(tuple(vid[s] for s in chain))
    # lower-dimensional maximal simplices (non-pure complexes)
    for s in order:
        if not K.cofaces(s) and len(s) - 1 < K.n:
            for chain in _flags(s):
                tops.append(tuple(vid[x] for x in chain))
    coords = None
    if K.coords is not None:
        scale = lcm(*range(1, K.n + 2))
        coords = []
        for s in order:
            pts = [K.coords[v] for v in s]
            coords.append(tuple(sum(c) * scale // len(pts) for c in zip(*pts)))
    delta, bnd = [], []
    new = DeltaComplex(tops, K.n, coords=coords, check_codim=False)
    carrier = {}
    for s in new.all_simplices():
        car = order[max(s)]
        carrier[s] = car
        if car in K.delta:
            delta.append(s)
        if car in K.boundary:
            bnd.append(s)
    out = DeltaComplex(new.all_simplices(), K.n, delta, bnd, coords)
    if K.orientation is not None:
        ref = {}
        for t in out.top:
            par = carrier[t]
            # orientation of a flag simplex relative to its parent
            ref[t] = K.orientation[par] * _flag_sign(K, out, t, par)
        out.orientation = ref
    return out, carrier


def _flags(s: Simplex) -> list[list[Simplex]]:
    """All maximal chains of faces (v) ⊂ ... ⊂ s, smallest first."""
    if len(s) == 1:
        return [[s]]
    out = []
    for f in facets_of(s):
        for ch in _flags(f):
            out.append(ch + [s])
    return out


def _flag_sign(K, Kb, t, parent) -> int:
    """Orientation of a subdivision top cell relative to its parent.

    Uses barycentric coordinates: the flag simplex with vertices b(f_0),...,b(f_n)
    has the parent-relative orientation of the permutation that lists parent
    vertices in the order they are added along the flag.
    """
    order = K.all_simplices()
    chain = [order[v] for v in t]
    added = [chain[0][0]] + [next(iter(set(chain[i]) - set(chain[i - 1])))
                             for i in range(1, len(chain))]
    # b(f_k) - b(f_0) in parent barycentric coordinates is triangular in this order
    perm = [parent.index(v) for v in added]
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


class DualGraph:
    """Top simplices of a region joined across interior, non-boundary facets."""

    def __init__(self, nodes: list[Simplex], edges: list[tuple[Simplex, Simplex, Simplex]]):
        self.nodes = nodes
        self.edges = edges  # (facet, cell_a, cell_b) with cell_a < cell_b
        self.adj: dict[Simplex, list[tuple[Simplex, Simplex]]] = {c: [] for c in nodes}
        for f, a, b in edges:
            self.adj[a].append((b, f))
            self.adj[b].append((a, f))

    def bfs_tree(self, root: Simplex) -> dict[Simplex, tuple[Simplex, Simplex] | None]:
        """parent map: cell -> (parent cell, shared facet); root maps to None."""
        par = {root: None}
        q = deque([root])
        while q:
            c = q.popleft()
            for c2, f in self.adj[c]:
                if c2 not in par:
                    par[c2] = (c, f)
                    q.append(c2)
        return par

    def components(self) -> list[list[Simplex]]:
        seen, comps = set(), []
        for c in self.nodes:
            if c in seen:
                continue
            comp = list(self.bfs_tree(c))
            seen.update(comp)
            comps.append(sorted(comp))
        return comps


def dual_graph(K: DeltaComplex, region: Iterable[Simplex] | None = None) -> DualGraph:
    if region is None:
        tops = list(K.top)
    else:
        rs = set(tuple(s) for s in region)
        tops = [c for c in K.top if c in rs]
    ts = set(tops)
    edges = []
    for f in K.simplices[K.n - 1] if K.n >= 1 else []:
        if f in K.boundary:
            continue
        cs = [c for c in K.cofaces(f) if c in ts]
        if len(cs) == 2:
            edges.append((f, cs[0], cs[1]))
    edges.sort(key=lambda e: (e[1], e[2], e[0]))
    return DualGraph(sorted(tops), edges)
