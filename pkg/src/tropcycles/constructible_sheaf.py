"""Constructible sheaves on a simplicial complex, presented as functors on faces.

``closed`` kind: A_tau is the group of sections near the closed simplex tau.
These are the homology coefficients. For tau ⊂ sigma there is a map A_sigma -> A_tau.

``open`` kind: A_tau is the group of sections over the open star W_tau. These
are the Čech terms. For tau ⊂ sigma there is a map A_tau -> A_sigma.

Lattices live in the p-th exterior power of the stalk, written in the
gauge-fixed frame of the anchor cell of tau (see ``local_system``).
"""

from __future__ import annotations

from math import comb
from typing import Sequence

from .exact_algebra import ExactMatrix, Lattice
from .local_system import LocalSystem, invariant_lattice, star_monodromy
from .simplicial_complex import DeltaComplex, Simplex, faces_of


class SheafError(ValueError):
    pass


class SheafFunctor:
    def __init__(self, L: LocalSystem, p: int, kind: str = "closed", field: str = "Z",
                 dual: bool = False):
        if kind not in ("closed", "open"):
            raise SheafError(f"unknown sheaf kind {kind!r}")
        if not 0 <= p <= L.rank:
            raise SheafError(f"wedge degree {p} out of range for rank {L.rank}")
        K = L.base
        if any(len(s) - 1 > K.n - 2 for s in K.delta):
            raise SheafError("discriminant of codimension < 2")
        self.L = L
        self.complex: DeltaComplex = K
        self.p = p
        self.kind = kind
        self.field = field
        self.dual = dual
        self.N = comb(L.rank, p)
        self._inv: dict[Simplex, Lattice] = {}
        self._val: dict[Simplex, Lattice] = {}
        self._res: dict = {}
        self._near: set | None = None

    def __repr__(self):
        return f"SheafFunctor(p={self.p}, kind={self.kind}, field={self.field}, dual={self.dual})"

    # ------------------------------------------------------------- lattices
    def star_invariants(self, omega: Simplex) -> Lattice:
        """Invariants of the monodromy of the open star of omega (anchor frame)."""
        omega = tuple(omega)
        hit = self._inv.get(omega)
        if hit is None and omega not in self._near_delta():
            # the open star misses Δ, so it is contractible and the monodromy trivial
            hit = self._inv[omega] = Lattice.full(self.N)
        if hit is None:
            gens = star_monodromy(self.L, omega)
            hit = invariant_lattice(gens, self.p)
            self._inv[omega] = hit
        return hit

    def _near_delta(self) -> set:
        """Faces of discriminant simplices: the only stars that can carry monodromy."""
        if self._near is None:
            self._near = {f for d in self.complex.delta for f in faces_of(d)}
        return self._near

    def wedge_transport(self, omega: Simplex, c_from: Simplex, c_to: Simplex) -> ExactMatrix:
        M = self.L.star_transport(omega, c_from, c_to)
        return self.L.wedge(M, self.p)

    def lattice(self, tau: Sequence[int]) -> Lattice:
        tau = tuple(tau)
        hit = self._val.get(tau)
        if hit is not None:
            return hit
        if self.kind == "open":
            val = self.star_invariants(tau)
        else:
            anchor = self.L.anchor(tau)
            val = Lattice.full(self.N)
            for omega in faces_of(tau):
                inv = self.star_invariants(omega)
                if inv.rank == self.N:
                    continue
                M = self.wedge_transport(omega, self.L.anchor(omega), anchor)
                val = val.intersect(inv.image(M))
                if val.rank == 0:
                    break
        self._val[tau] = val
        return val

    values = lattice

    def rank(self, tau) -> int:
        return self.lattice(tau).rank

    # ------------------------------------------------------------- restriction
    def ambient_map(self, tau: Simplex, sigma: Simplex) -> ExactMatrix:
        """Transport matrix on the ambient wedge power for a face pair tau ⊂ sigma.

        Closed kind goes from sigma's frame to tau's, open kind the other way.
        Both move inside the star of tau.
        """
        at, asg = self.L.anchor(tau), self.L.anchor(sigma)
        if self.kind == "closed":
            return self.wedge_transport(tau, asg, at)
        return self.wedge_transport(tau, at, asg)

    def restriction(self, tau: Sequence[int], sigma: Sequence[int]) -> ExactMatrix:
        """Map of lattice coordinates for tau ⊂ sigma, in the functor's direction."""
        tau, sigma = tuple(tau), tuple(sigma)
        key = (tau, sigma)
        hit = self._res.get(key)
        if hit is not None:
            return hit
        if not set(tau) <= set(sigma):
            raise SheafError(f"{tau} is not a face of {sigma}")
        M = self.ambient_map(tau, sigma)
        if self.kind == "closed":
            src, dst = self.lattice(sigma), self.lattice(tau)
        else:
            src, dst = self.lattice(tau), self.lattice(sigma)
        cols = []
        for v in src.vectors():
            w = M.apply(v)
            c = dst.coordinates(w)
            if c is None:
                raise SheafError(f"restriction {tau}⊂{sigma} leaves the target lattice")
            cols.append(c)
        R = ExactMatrix.from_columns(cols, dst.rank)
        self._res[key] = R
        return R

    def check_monotone(self) -> bool:
        """Every face pair maps lattice into lattice (raises otherwise)."""
        K = self.complex
        for d in range(1, K.n + 1):
            for s in K.simplices[d]:
                for i in range(len(s)):
                    self.restriction(s[:i] + s[i + 1:], s)
        return True


def pushforward_sheaf(L: LocalSystem, p: int, kind: str = "closed", dual: bool = False) -> SheafFunctor:
    """Pushforward of the p-th exterior power of L from the complement of the discriminant."""
    return SheafFunctor(L, p, kind, "Z", dual)


def rationalize(F: SheafFunctor) -> SheafFunctor:
    G = SheafFunctor(F.L, F.p, F.kind, "Q", F.dual)
    G._inv, G._val, G._res = F._inv, F._val, F._res
    return G


def stalk_pairing_tr(a: Sequence[int], b: Sequence[int]) -> int:
    """Evaluation of a wedge of functionals on a wedge of vectors, in dual lex bases."""
    if len(a) != len(b):
        raise SheafError("stalk vectors of different lengths")
    return sum(x * y for x, y in zip(a, b))


class AbstractFunctor:
    """Per-simplex free groups and explicit generization matrices.

    ``maps[(tau, sigma)]`` for tau a facet of sigma goes from the stalk at tau
    to the stalk at sigma (sigma is more generic).
    """

    def __init__(self, complex: DeltaComplex, ranks: dict, maps: dict):
        self.complex = complex
        self.ranks = ranks
        self.maps = maps

    def rank(self, tau) -> int:
        return self.ranks.get(tuple(tau), 0)

    def map(self, tau, sigma) -> ExactMatrix:
        tau, sigma = tuple(tau), tuple(sigma)
        if (tau, sigma) in self.maps:
            return self.maps[(tau, sigma)]
        return ExactMatrix.zeros(self.rank(sigma), self.rank(tau))

    def check_compatible(self) -> bool:
        """Both routes through a two-step face chain agree."""
        K = self.complex
        for d in range(2, K.n + 1):
            for s in K.simplices[d]:
                for i in range(len(s)):
                    for j in range(i + 1, len(s)):
                        g = tuple(v for k, v in enumerate(s) if k not in (i, j))
                        f1 = s[:i] + s[i + 1:]
                        f2 = s[:j] + s[j + 1:]
                        if self.map(f1, s) @ self.map(g, f1) != self.map(f2, s) @ self.map(g, f2):
                            return False
        return True


def quotient_sheaf_S(model) -> AbstractFunctor:
    """The sheaf supported on the discriminant with stalks Hom(T_face, Q).

    ``model`` is a symple model from the model library. A simplex of the
    discriminant gets the face of the dual simplex attached to the stratum of
    its second factor. Stalks are the functionals on that face's tangent space.
    Generization restricts functionals to the smaller face.
    """
    K = model.complex
    ranks, maps = {}, {}
    face_of = {}
    for s in K.all_simplices():
        if s in K.delta:
            face = model.cotriangle_face(s)
            face_of[s] = face
            ranks[s] = len(face) - 1
    for s, face in face_of.items():
        for c in K.cofaces(s):
            if c in face_of:
                maps[(s, c)] = model.tangent_restriction(face, face_of[c])
    return AbstractFunctor(K, ranks, maps)
