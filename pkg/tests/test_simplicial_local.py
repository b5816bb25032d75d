import random

import pytest

from tropcycles.exact_algebra import ExactMatrix, Lattice, smith_divisors
from tropcycles.homology_engine import homology, GradedComplex, SparseMatrix
from tropcycles.local_system import (
    LocalSystem, LocalSystemError, dual_system, focus_focus, invariant_lattice,
    star_monodromy, transport,
)
from tropcycles.model_library import build_focus_focus, build_goggles, loop_monodromy
from tropcycles.simplicial_complex import (
    ComplexError, DeltaComplex, barycentric_subdivision, boundary_sign,
    closed_star, dual_graph, open_star_intersection,
)


def constant_boundary_complex(K):
    dims = [K.num(d) for d in range(K.n + 1)]
    d = {}
    for i in range(1, K.n + 1):
        M = SparseMatrix(dims[i - 1], dims[i])
        for j, s in enumerate(K.simplices[i]):
            for k in range(len(s)):
                M.add(K.index[s[:k] + s[k + 1:]], j, -1 if k % 2 else 1)
        d[i] = M
    return GradedComplex(dims, d)


def random_complex(rng, n_vertices=7, n_tris=6):
    tris = set()
    while len(tris) < n_tris:
        tris.add(tuple(sorted(rng.sample(range(n_vertices), 3))))
    used = sorted({v for t in tris for v in t})
    ren = {v: i for i, v in enumerate(used)}
    return DeltaComplex([tuple(ren[v] for v in t) for t in tris])


def test_boundary_sign_examples():
    assert boundary_sign((0, 1), (1,)) == 1
    assert boundary_sign((0, 1), (0,)) == -1
    assert boundary_sign((0, 1, 2), (0, 2)) == -1
    with pytest.raises(ComplexError):
        boundary_sign((0, 1, 2), (0,))


def test_closure_and_flags():
    K = DeltaComplex([(0, 1, 2)], delta=[(0,)], boundary=[(0, 1)])
    assert K.num(0) == 3 and K.num(1) == 3
    assert (0,) in K.boundary and (1,) in K.boundary
    with pytest.raises(ComplexError):
        DeltaComplex([(0, 1, 2)], delta=[(0, 1)])
    with pytest.raises(ComplexError):
        DeltaComplex([(0, 2)])


def test_closed_star_examples():
    K = DeltaComplex([(0, 1, 2)])
    assert len(closed_star(K, (0,))) == 7
    P = DeltaComplex([(0, 1), (1, 2)])
    assert set(closed_star(P, (1,)).members) == set(P.all_simplices())
    assert set(closed_star(K, (0, 1, 2)).members) == set(K.all_simplices())
    with pytest.raises(ComplexError):
        closed_star(K, (0, 3))


def test_closed_star_monotone():
    M = build_goggles()
    K = M.complex
    for s in K.simplices[1][:40]:
        big = set(closed_star(K, s[:1]).members)
        assert set(closed_star(K, s).members) <= big


def test_open_star_intersection():
    K = DeltaComplex([(0, 1, 2), (2, 3)])
    assert open_star_intersection(K, [1]) == (1,)
    assert open_star_intersection(K, [2, 3]) == (2, 3)
    assert open_star_intersection(K, [0, 3]) is None


def test_barycentric_counts_and_euler():
    Ke = DeltaComplex([(0, 1)])
    Kb, _ = barycentric_subdivision(Ke)
    assert (Kb.num(0), Kb.num(1)) == (3, 2)
    Kt, _ = barycentric_subdivision(DeltaComplex([(0, 1, 2)]))
    assert Kt.num(2) == 6
    rng = random.Random(7)
    for _ in range(20):
        K = random_complex(rng)
        Kb, carrier = barycentric_subdivision(K)
        assert Kb.euler_characteristic() == K.euler_characteristic()
        a = [h.invariants() for h in homology(constant_boundary_complex(K))]
        b = [h.invariants() for h in homology(constant_boundary_complex(Kb))]
        assert a == b
        assert all(len(carrier[s]) >= 1 for s in Kb.all_simplices())


def test_boundary_squared_zero():
    for K in (build_goggles().complex, DeltaComplex([(0, 1, 2, 3)])):
        assert constant_boundary_complex(K).check_d_squared()


def test_dual_graph_examples():
    G = dual_graph(DeltaComplex([(0, 1, 2), (1, 2, 3)]))
    assert len(G.nodes) == 2 and len(G.edges) == 1
    hexagon = DeltaComplex([(0, i, i % 6 + 1) if i < 6 else (0, 1, 6) for i in range(1, 7)])
    G = dual_graph(hexagon)
    assert len(G.nodes) == 6 and len(G.edges) == 6
    assert all(len(G.adj[c]) == 2 for c in G.nodes)
    G = dual_graph(DeltaComplex([(0, 1, 2)]))
    assert len(G.nodes) == 1 and not G.edges


def test_transport_and_focus_focus_loop():
    M = build_focus_focus()
    K, L = M
    c = K.top[0]
    assert transport(L, [c]) == ExactMatrix.identity(2)
    a, b = L.graph.edges[0][1:]
    assert transport(L, [a, b]) == L.t(a, b)
    assert transport(L, [b, a]) @ transport(L, [a, b]) == ExactMatrix.identity(2)
    d = M.info["vid"][(3, 3)]
    assert loop_monodromy(L, d) == ExactMatrix([[1, 1], [0, 1]], 2, 2)
    gens = star_monodromy(L, (d,))
    assert len(gens) == 1
    T = gens.loops[0]
    assert list(smith_divisors(T - ExactMatrix.identity(2))) == [1]
    assert invariant_lattice(gens, 1) == Lattice(2, [[1, 0]])
    with pytest.raises(LocalSystemError):
        transport(L, [K.top[0], K.top[-1]])


def test_empty_star_monodromy_and_invariants():
    M = build_focus_focus()
    K, L = M
    far = M.info["vid"][(0, 0)]
    assert len(star_monodromy(L, (far,))) == 0
    assert invariant_lattice([], 1, rank=2) == Lattice.full(2)
    assert invariant_lattice([ExactMatrix([[1, 1], [0, 1]], 2, 2)], 1) == Lattice(2, [[1, 0]])


def test_goggle_global_dual_invariants():
    M = build_goggles()
    K, L = M
    D = dual_system(L)
    T = ExactMatrix([[1, 1], [0, 1]], 2, 2)
    Tdual = ExactMatrix([[1, 0], [-1, 1]], 2, 2)
    assert invariant_lattice([Tdual, Tdual], 1) == Lattice(2, [[0, 1]])
    # dual of a single transvection edge
    d2 = dual_system(D)
    for a, b, Mx in L.explicit_transitions():
        assert d2.t(a, b) == Mx
        assert D.t(a, b).T @ Mx == ExactMatrix.identity(2)
    assert invariant_lattice([T], 1) == Lattice(2, [[1, 0]])


def test_dual_system_example():
    K = DeltaComplex([(0, 1, 2), (1, 2, 3)])
    L = LocalSystem(K, 2, {((0, 1, 2), (1, 2, 3)): [[1, 1], [0, 1]]})
    D = dual_system(L)
    assert D.t((0, 1, 2), (1, 2, 3)) == ExactMatrix([[1, 0], [-1, 1]], 2, 2)
    triv = LocalSystem(K, 2)
    assert not dual_system(triv).explicit_transitions()


def test_local_system_validation():
    K = DeltaComplex([(0, 1, 2), (1, 2, 3)])
    with pytest.raises(LocalSystemError):
        LocalSystem(K, 2, {((0, 1, 2), (1, 2, 3)): [[2, 0], [0, 1]]})
    K2 = DeltaComplex([(0, 1, 2), (2, 3, 4)])
    with pytest.raises(LocalSystemError):
        LocalSystem(K2, 2, {((0, 1, 2), (2, 3, 4)): [[1, 1], [0, 1]]})


def test_invariants_order_independent_and_monotone():
    rng = random.Random(11)
    mats = [focus_focus(m) for m in [(1, 0), (0, 1), (1, 1), (2, 1)]]
    for _ in range(10):
        sub = rng.sample(mats, 2)
        a = invariant_lattice(sub, 1)
        b = invariant_lattice(list(reversed(sub)), 1)
        assert a == b
        bigger = invariant_lattice(sub + [rng.choice(mats)], 1)
        assert bigger.intersect(a) == bigger
    # top wedge of SL_2 generators is fixed
    assert invariant_lattice(mats, 2) == Lattice.full(1)
