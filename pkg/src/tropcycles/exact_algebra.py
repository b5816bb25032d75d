"""Exact integer linear algebra.

Everything here works on Python ints, so there is no overflow. Matrices are
immutable row-major tuples. The Smith form picks the pivot with the smallest
absolute value to keep entries small.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence


@lru_cache(maxsize=None)
def _identity_entries(n: int) -> tuple:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


class ExactMatrix:
    """Immutable integer matrix."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Iterable[Iterable[int]] = (), rows: int | None = None,
                 cols: int | None = None):
        data = tuple(tuple(int(x) for x in r) for r in entries)
        if rows is None:
            rows = len(data)
        if cols is None:
            cols = len(data[0]) if data else 0
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ValueError("ragged or mis-sized matrix data")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", data)

    def __setattr__(self, name, value):
        raise AttributeError("ExactMatrix is immutable")

    @classmethod
    def _make(cls, data: tuple, rows: int, cols: int) -> "ExactMatrix":
        """Trusted constructor for tuple-of-tuple int data built internally."""
        m = object.__new__(cls)
        object.__setattr__(m, "rows", rows)
        object.__setattr__(m, "cols", cols)
        object.__setattr__(m, "entries", data)
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls([[0] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "ExactMatrix":
        cols = [list(c) for c in columns]
        return cls([[c[i] for c in cols] for i in range(rows)], rows, len(cols))

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        return (isinstance(other, ExactMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        return f"ExactMatrix({[list(r) for r in self.entries]}, {self.rows}, {self.cols})"

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    def column(self, j: int) -> list[int]:
        return [r[j] for r in self.entries]

    def columns(self) -> list[list[int]]:
        return [self.column(j) for j in range(self.cols)]

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix([[self.entries[i][j] for i in range(self.rows)]
                            for j in range(self.cols)], self.cols, self.rows)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        if self.rows == self.cols and self.entries == _identity_entries(self.rows):
            return other
        if other.rows == other.cols and other.entries == _identity_entries(other.rows):
            return self
        oc = tuple(zip(*other.entries)) if other.rows else ((),) * other.cols
        return ExactMatrix._make(tuple(tuple(sum(a * b for a, b in zip(r, c) if a) for c in oc)
                                       for r in self.entries), self.rows, other.cols)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return ExactMatrix([[a + b for a, b in zip(r, s)]
                            for r, s in zip(self.entries, other.entries)], self.rows, self.cols)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix([[-a for a in r] for r in self.entries], self.rows, self.cols)

    def scale(self, k: int) -> "ExactMatrix":
        return ExactMatrix([[k * a for a in r] for r in self.entries], self.rows, self.cols)

    def apply(self, v: Sequence[int]) -> list[int]:
        return [sum(a * b for a, b in zip(r, v) if a) for r in self.entries]

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.entries)

    def hstack(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch")
        return ExactMatrix([a + b for a, b in zip(self.entries, other.entries)],
                           self.rows, self.cols + other.cols)

    def vstack(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.cols:
            raise ValueError("column mismatch")
        return ExactMatrix(self.entries + other.entries, self.rows + other.rows, self.cols)


def as_matrix(a) -> ExactMatrix:
    if isinstance(a, ExactMatrix):
        return a
    rows = [list(r) for r in a]
    return ExactMatrix(rows, len(rows), len(rows[0]) if rows else 0)


def block_diag(blocks: Sequence[ExactMatrix]) -> ExactMatrix:
    R = sum(b.rows for b in blocks)
    C = sum(b.cols for b in blocks)
    out = [[0] * C for _ in range(R)]
    r0 = c0 = 0
    for b in blocks:
        for i, row in enumerate(b.entries):
            out[r0 + i][c0:c0 + b.cols] = row
        r0 += b.rows
        c0 += b.cols
    return ExactMatrix(out, R, C)


# ---------------------------------------------------------------- determinants

def bareiss_det(a: Sequence[Sequence[int]]) -> int:
    """Fraction-free determinant of a square integer matrix."""
    m = [list(r) for r in a]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def bareiss_rank(a) -> int:
    """Rank by fraction-free elimination (independent of the Smith form code)."""
    m = [list(r) for r in as_matrix(a).entries]
    if not m:
        return 0
    rows, cols = len(m), len(m[0])
    r, prev = 0, 1
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                m[i][j] = (m[i][j] * m[r][c] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        if r == rows:
            break
    return r


def rational_rank(a) -> int:
    return bareiss_rank(a)


# ---------------------------------------------------------------- Smith form

class SmithDecomposition:
    """U·A·V = diag(divisors, 0, ...), with U and V unimodular."""

    __slots__ = ("U", "V", "divisors", "rank", "U_inv", "V_inv")

    def __init__(self, U, V, divisors, U_inv=None, V_inv=None):
        self.U = U
        self.V = V
        self.divisors = tuple(divisors)
        self.rank = len(self.divisors)
        self.U_inv = U_inv
        self.V_inv = V_inv

    def diagonal(self, rows: int, cols: int) -> ExactMatrix:
        out = [[0] * cols for _ in range(rows)]
        for i, d in enumerate(self.divisors):
            out[i][i] = d
        return ExactMatrix(out, rows, cols)

    def __repr__(self):
        return f"SmithDecomposition(divisors={self.divisors})"


def _smith_core(a: list[list[int]], rows: int, cols: int, track: bool):
    """In-place Smith reduction. Returns (divisors, U, V, Uinv, Vinv) as lists.

    Row ops act on U (left) and Uinv (right, inverse op); column ops on V and Vinv.
    """
    U = [[int(i == j) for j in range(rows)] for i in range(rows)] if track else None
    Ui = [[int(i == j) for j in range(rows)] for i in range(rows)] if track else None
    V = [[int(i == j) for j in range(cols)] for i in range(cols)] if track else None
    Vi = [[int(i == j) for j in range(cols)] for i in range(cols)] if track else None

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        if track:
            U[i], U[j] = U[j], U[i]
            for r in Ui:
                r[i], r[j] = r[j], r[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        if track:
            for r in V:
                r[i], r[j] = r[j], r[i]
            Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        ra, rs = a[dst], a[src]
        for k in range(cols):
            if rs[k]:
                ra[k] += q * rs[k]
        if track:
            ud, us = U[dst], U[src]
            for k in range(rows):
                if us[k]:
                    ud[k] += q * us[k]
            for r in Ui:
                if r[dst]:
                    r[src] -= q * r[dst]

    def add_col(dst, src, q):
        # col_dst += q * col_src
        for r in a:
            if r[src]:
                r[dst] += q * r[src]
        if track:
            for r in V:
                if r[src]:
                    r[dst] += q * r[src]
            vd, vs = Vi[dst], Vi[src]
            for k in range(cols):
                if vd[k]:
                    vs[k] -= q * vd[k]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        if track:
            U[i] = [-x for x in U[i]]
            for r in Ui:
                r[i] = -r[i]

    divisors = []
    t = 0
    while t < rows and t < cols:
        best = None
        for i in range(t, rows):
            ri = a[i]
            for j in range(t, cols):
                x = ri[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        if pi != t:
            swap_rows(t, pi)
        if pj != t:
            swap_cols(t, pj)
        while True:
            p = a[t][t]
            moved = False
            for i in range(t + 1, rows):
                x = a[i][t]
                if x:
                    q = -_round_div(x, p)
                    add_row(i, t, q)
            for j in range(t + 1, cols):
                x = a[t][j]
                if x:
                    q = -_round_div(x, p)
                    add_col(j, t, q)
            # smallest leftover in pivot row/column becomes the new pivot
            cand = None
            for i in range(t + 1, rows):
                x = a[i][t]
                if x and (cand is None or abs(x) < cand[0]):
                    cand = (abs(x), i, None)
            for j in range(t + 1, cols):
                x = a[t][j]
                if x and (cand is None or abs(x) < cand[0]):
                    cand = (abs(x), None, j)
            if cand is not None:
                if cand[1] is not None:
                    swap_rows(t, cand[1])
                else:
                    swap_cols(t, cand[2])
                moved = True
            if moved:
                continue
            # divisibility of the remaining block
            bad = None
            for i in range(t + 1, rows):
                ri = a[i]
                for j in range(t + 1, cols):
                    if ri[j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            negate_row(t)
        divisors.append(a[t][t])
        t += 1
    return divisors, U, V, Ui, Vi


def _round_div(x: int, p: int) -> int:
    """Nearest-integer quotient, used to keep remainders small."""
    q, r = divmod(x, p)
    if 2 * abs(r) > abs(p):
        q += 1
    return q


def smith_normal_form(A, transforms: bool = True) -> SmithDecomposition:
    """Smith normal form with unimodular transforms, deterministic for fixed input."""
    A = as_matrix(A)
    a = [list(r) for r in A.entries]
    divs, U, V, Ui, Vi = _smith_core(a, A.rows, A.cols, transforms)
    if not transforms:
        return SmithDecomposition(None, None, divs)
    return SmithDecomposition(ExactMatrix(U, A.rows, A.rows), ExactMatrix(V, A.cols, A.cols), divs,
                              ExactMatrix(Ui, A.rows, A.rows), ExactMatrix(Vi, A.cols, A.cols))


def smith_divisors(A) -> tuple[int, ...]:
    return smith_normal_form(A, transforms=False).divisors


def rank(A) -> int:
    return len(smith_divisors(A))


# ---------------------------------------------------------------- Hermite form

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def row_hermite(rows: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Row-style Hermite normal form; zero rows are dropped.

    Pivots are positive and entries above a pivot lie in [0, pivot).
    """
    m = [list(r) for r in rows if any(r)]
    out: list[list[int]] = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(m)):
            if m[i][c]:
                if piv is None:
                    piv = i
                    m[r], m[i] = m[i], m[r]
                else:
                    a, b = m[r][c], m[i][c]
                    g, x, y = _xgcd(a, b)
                    ra, rb = m[r], m[i]
                    new_r = [x * u + y * v for u, v in zip(ra, rb)]
                    new_i = [(a // g) * v - (b // g) * u for u, v in zip(ra, rb)]
                    m[r], m[i] = new_r, new_i
        if piv is None:
            continue
        if m[r][c] < 0:
            m[r] = [-x for x in m[r]]
        p = m[r][c]
        for i in range(r):
            q = m[i][c] // p
            if q:
                m[i] = [u - q * v for u, v in zip(m[i], m[r])]
        r += 1
        m = m[:r] + [row for row in m[r:] if any(row)]
    return m[:r]


# ---------------------------------------------------------------- lattices

class Lattice:
    """Subgroup of Z^N given by independent basis columns in Hermite form."""

    __slots__ = ("ambient_rank", "basis", "saturated")

    def __init__(self, ambient_rank: int, vectors: Iterable[Sequence[int]] = (),
                 saturated: bool | None = None):
        vecs = [list(v) for v in vectors]
        for v in vecs:
            if len(v) != ambient_rank:
                raise ValueError("vector length does not match ambient rank")
        h = row_hermite(vecs, ambient_rank)
        self.ambient_rank = ambient_rank
        self.basis = ExactMatrix.from_columns(h, ambient_rank)
        if saturated is None:
            saturated = all(d == 1 for d in smith_divisors(self.basis))
        self.saturated = saturated

    @classmethod
    def full(cls, n: int) -> "Lattice":
        return cls(n, [[int(i == j) for j in range(n)] for i in range(n)], True)

    @classmethod
    def zero(cls, n: int) -> "Lattice":
        return cls(n, [], True)

    @property
    def rank(self) -> int:
        return self.basis.cols

    def vectors(self) -> list[list[int]]:
        return self.basis.columns()

    def __eq__(self, other):
        return (isinstance(other, Lattice) and self.ambient_rank == other.ambient_rank
                and self.basis == other.basis)

    def __hash__(self):
        return hash(self.basis)

    def __repr__(self):
        return f"Lattice(N={self.ambient_rank}, basis={self.vectors()})"

    def coordinates(self, v: Sequence[int]) -> list[int] | None:
        """Integer coordinates of v in the basis, or None if v is not in the lattice."""
        rows = self.vectors()
        res = list(v)
        coeffs = []
        for row in rows:
            c = next(k for k, x in enumerate(row) if x)
            if res[c] % row[c]:
                return None
            q = res[c] // row[c]
            coeffs.append(q)
            if q:
                res = [a - q * b for a, b in zip(res, row)]
        return coeffs if not any(res) else None

    def __contains__(self, v) -> bool:
        return self.coordinates(v) is not None

    def image(self, M: ExactMatrix) -> "Lattice":
        return Lattice(M.rows, [M.apply(v) for v in self.vectors()])

    def saturation(self) -> "Lattice":
        if self.saturated:
            return self
        # saturation = kernel of the annihilator
        ann = kernel_lattice(self.basis.T) if self.rank else Lattice.full(self.ambient_rank)
        if ann.rank == 0:
            return Lattice.full(self.ambient_rank)
        return kernel_lattice(ExactMatrix([v for v in ann.vectors()], ann.rank, self.ambient_rank))

    def intersect(self, other: "Lattice") -> "Lattice":
        if self.ambient_rank != other.ambient_rank:
            raise ValueError("ambient mismatch")
        if self.rank == 0 or other.rank == 0:
            return Lattice.zero(self.ambient_rank)
        M = self.basis.hstack(-other.basis)
        ker = kernel_lattice(M)
        out = [self.basis.apply(v[:self.rank]) for v in ker.vectors()]
        return Lattice(self.ambient_rank, out, self.saturated and other.saturated or None)


def kernel_lattice(A) -> Lattice:
    """Saturated lattice {v in Z^cols : A v = 0}."""
    A = as_matrix(A)
    if A.rows == 0:
        return Lattice.full(A.cols)
    s = smith_normal_form(A)
    V = s.V
    return Lattice(A.cols, [V.column(j) for j in range(s.rank, A.cols)], True)


def cokernel_invariants(A) -> tuple[int, tuple[int, ...]]:
    """(free rank, torsion divisors > 1) of Z^rows / A Z^cols."""
    A = as_matrix(A)
    divs = smith_divisors(A)
    return A.rows - len(divs), tuple(d for d in divs if d > 1)


def dual_basis(L: Lattice) -> ExactMatrix:
    """Rows phi_i in the dual ambient space with phi_i(b_j) = delta_ij.

    Requires a saturated lattice; any such phi realises Hom(L, Z).
    """
    if not L.saturated:
        raise ValueError("dual of an unsaturated lattice is not cut out by ambient functionals")
    B = L.basis
    if B.cols == 0:
        return ExactMatrix.zeros(0, L.ambient_rank)
    s = smith_normal_form(B)
    # U B V = [I; 0]  =>  (V U[:k]) B = I
    Uk = ExactMatrix(s.U.entries[:B.cols], B.cols, B.rows)
    return s.V @ Uk


def dual_lattice_map(L: Lattice) -> Lattice:
    """Hom(L, Z) realised as a complement of the annihilator in the dual ambient lattice."""
    phi = dual_basis(L)
    return Lattice(L.ambient_rank, phi.tolist(), True)


# ---------------------------------------------------------------- exterior powers

def wedge_basis(n: int, p: int) -> list[tuple[int, ...]]:
    if p < 0 or p > n:
        raise ValueError(f"wedge degree {p} out of range for rank {n}")
    return list(combinations(range(n), p))


def exterior_power_matrix(T, p: int) -> ExactMatrix:
    """Matrix of the p-th exterior power in the lexicographic wedge basis."""
    T = as_matrix(T)
    n = T.rows
    if T.cols != n:
        raise ValueError("exterior power needs a square matrix")
    idx = wedge_basis(n, p)
    e = T.entries
    out = [[bareiss_det([[e[i][j] for j in J] for i in I]) for J in idx] for I in idx]
    return ExactMatrix(out, len(idx), len(idx))


def _merge_sign(I: Sequence[int], J: Sequence[int]) -> int:
    inv = 0
    for i in I:
        for j in J:
            if i > j:
                inv += 1
    return -1 if inv % 2 else 1


def wedge_product(xi: Sequence[int], p: int, eta: Sequence[int], q: int, n: int) -> list[int]:
    """xi ∧ eta in the lexicographic basis of the (p+q)-th power."""
    bp, bq, bpq = wedge_basis(n, p), wedge_basis(n, q), wedge_basis(n, p + q)
    pos = {I: k for k, I in enumerate(bpq)}
    out = [0] * len(bpq)
    for a, I in enumerate(bp):
        if not xi[a]:
            continue
        for b, J in enumerate(bq):
            if eta[b] and not set(I) & set(J):
                K = tuple(sorted(I + J))
                out[pos[K]] += _merge_sign(I, J) * xi[a] * eta[b]
    return out


def wedge_ratio(xi: Sequence[int], eta: Sequence[int], Omega=1, n: int | None = None) -> int:
    """The integer k with xi ∧ eta = k·Omega, Omega = ±e_1∧...∧e_n."""
    if isinstance(Omega, (list, tuple)):
        if len(Omega) != 1:
            raise ValueError("Omega must be a top-degree element")
        Omega = Omega[0]
    if Omega not in (1, -1):
        raise ValueError("Omega must be a generator of the top exterior power")
    if n is None:
        n = _infer_rank(len(xi), len(eta))
    p = next(k for k in range(n + 1) if len(wedge_basis(n, k)) == len(xi)
             and len(wedge_basis(n, n - k)) == len(eta))
    top = wedge_product(xi, p, eta, n - p, n)
    return top[0] * Omega


def _infer_rank(a: int, b: int) -> int:
    from math import comb
    for n in range(0, 64):
        for p in range(n + 1):
            if comb(n, p) == a and comb(n, n - p) == b:
                return n
    raise ValueError("cannot infer ambient rank from wedge vector lengths")


def interior_contract(xi: Sequence[int], p: int, n: int, Omega: int = 1) -> list[int]:
    """Coefficients of the functional eta -> (xi ∧ eta)/Omega on the (n-p)-th power."""
    bq = wedge_basis(n, n - p)
    out = []
    for J in bq:
        e = [0] * len(bq)
        e[bq.index(J)] = 1
        out.append(wedge_product(xi, p, e, n - p, n)[0] * Omega)
    return out


# ---------------------------------------------------------------- rational helpers

def solve_rational(A, b: Sequence[int]) -> list[Fraction] | None:
    """Some rational solution of A x = b, or None."""
    A = as_matrix(A)
    m = [[Fraction(x) for x in r] + [Fraction(y)] for r, y in zip(A.entries, b)]
    rows, cols = A.rows, A.cols
    piv_cols = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    if any(m[i][cols] for i in range(r, rows)):
        return None
    x = [Fraction(0)] * cols
    for i, c in enumerate(piv_cols):
        x[c] = m[i][cols]
    return x


def solve_integer(A, b: Sequence[int]) -> list[int] | None:
    """Some integer solution of A x = b, or None."""
    A = as_matrix(A)
    if A.cols == 0:
        return [] if not any(b) else None
    s = smith_normal_form(A)
    c = s.U.apply(b)
    y = [0] * A.cols
    for i, d in enumerate(s.divisors):
        if c[i] % d:
            return None
        y[i] = c[i] // d
    if any(c[len(s.divisors):]):
        return None
    return s.V.apply(y)


def determinant(A) -> int:
    A = as_matrix(A)
    if A.rows != A.cols:
        raise ValueError("determinant of a non-square matrix")
    return bareiss_det(A.entries)


def inverse_unimodular(A) -> ExactMatrix:
    A = as_matrix(A)
    d = determinant(A)
    if d not in (1, -1):
        raise ValueError("matrix is not invertible over Z")
    n = A.rows
    cols = [solve_integer(A, [int(i == j) for i in range(n)]) for j in range(n)]
    return ExactMatrix.from_columns(cols, n)


def minors_gcd(A, k: int) -> int:
    """gcd of all k×k minors; brute force, used as an independent oracle."""
    A = as_matrix(A)
    g = 0
    for I in combinations(range(A.rows), k):
        for J in combinations(range(A.cols), k):
            g = gcd(g, bareiss_det([[A.entries[i][j] for j in J] for i in I]))
    return g
