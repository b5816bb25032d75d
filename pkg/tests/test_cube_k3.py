import pytest

from tropcycles.constructible_sheaf import pushforward_sheaf
from tropcycles.exact_algebra import ExactMatrix, bareiss_det
from tropcycles.homology_engine import (
    chain_complex, double_complex_total, homology, relative_sequence,
)
from tropcycles.local_system import LocalSystem, dual_system, star_monodromy
from tropcycles.model_library import (
    CUBE_BASIS, build_cube_k3, perturbed_intersection_points, regauge_cycle,
    ring_edges,
)
from tropcycles.pairing_intersection import (
    gram_lattice_classify, intersection_number, intersection_via_pairing,
    omega_contraction, pairing_matrix,
)


@pytest.fixture(scope="module")
def cube():
    return build_cube_k3()


@pytest.fixture(scope="module")
def h1(cube):
    K, L = cube
    C = chain_complex(K, pushforward_sheaf(L, 1))
    return C, homology(C)[1]


@pytest.fixture(scope="module")
def gram(cube):
    K, L = cube
    cs = [cube.cycles[n] for n in CUBE_BASIS]
    return [[intersection_via_pairing(L, a, b) for b in cs] for a in cs]


def test_shape_and_singular_points(cube):
    K, L = cube
    assert K.euler_characteristic() == 2
    assert len(K.delta) == 24
    pts = cube.info["points"]
    per_edge = {}
    for (v,) in K.delta:
        p = pts[v]
        axis = cube.info["directions"][v].index(1)
        key = (axis,) + tuple(x for i, x in enumerate(p) if i != axis)
        per_edge[key] = per_edge.get(key, 0) + 1
        assert all(x in (0, 7) for i, x in enumerate(p) if i != axis)
    assert len(per_edge) == 12 and set(per_edge.values()) == {2}


def test_monodromy_is_a_transvection_along_the_edge(cube):
    K, L = cube
    for (v,) in K.delta:
        (T,) = star_monodromy(L, (v,)).loops
        N = T - ExactMatrix.identity(2)
        assert N @ N == ExactMatrix.zeros(2, 2) and N != ExactMatrix.zeros(2, 2)


def test_rank_and_basis(cube, h1):
    C, H = h1
    assert H.invariants() == (20, ())
    X = [H.coordinates(C.chain_from_cells(1, cube.cycles[n].cells)) for n in CUBE_BASIS]
    assert abs(bareiss_det(X)) == 1
    for n in CUBE_BASIS:
        assert not C.boundary_of(1, C.chain_from_cells(1, cube.cycles[n].cells))


def test_double_complex_rank(cube):
    K, L = cube
    T = double_complex_total(K, pushforward_sheaf(L, 1))
    assert homology(T, degrees=[1])[0].betti == 20


def test_gram_is_k3_lattice(gram):
    rep = gram_lattice_classify(ExactMatrix(gram, 20, 20))
    assert rep["unimodular"] and rep["even"] and rep["signature"] == (2, 18)
    assert all(gram[i][j] == gram[j][i] for i in range(20) for j in range(20))


def test_equator_goggle_hyperbolic_pair(cube):
    K, L = cube
    e, g = cube.cycles["equator-x"], cube.cycles["goggle-x-0-0"]
    m = [[intersection_via_pairing(L, a, b) for b in (e, g)] for a in (e, g)]
    assert m == [[0, 1], [1, -2]]


def test_local_route_agrees(cube, gram):
    idx = [CUBE_BASIS.index(n) for n in ("equator-x", "belt-y", "goggle-x-0-0",
                                         "goggle-x-across-y0-lo", "tripod-0-0-0")]
    for i in idx:
        for j in idx:
            V, W = cube.cycles[CUBE_BASIS[i]], cube.cycles[CUBE_BASIS[j]]
            assert intersection_number(perturbed_intersection_points(cube, V, W)) == gram[i][j]


def test_goggles_sharing_a_point(cube):
    K, L = cube
    fam = cube.info["families"]
    delta = {v for (v,) in K.delta}
    gog = {n: c for n, c in fam.items() if n.startswith("goggle")}
    near = {n: {d for d in delta if len(set(ring_edges(K, d)) & set(c.cells)) >= 3}
            for n, c in gog.items()}
    assert all(len(v) == 2 for v in near.values())
    pairs = [(a, b) for a in gog for b in gog if a < b and len(near[a] & near[b]) == 1]
    assert pairs
    for a, b in pairs[:6]:
        assert abs(intersection_via_pairing(L, gog[a], gog[b])) == 1


def test_split_sequence(cube):
    K, L = cube
    r = relative_sequence(K, pushforward_sheaf(L, 1), "delta")
    assert r["betti"]["relative"][1] == 44
    assert r["betti"]["sub"][0] == 24 and r["betti"]["absolute"][0] == 0
    inc = r["inclusion"][1]
    assert inc["rank"] == 20 and set(inc["divisors"]) == {1} and inc["cokernel_rank"] == 24
    assert r["alternating_sum"] == 0


def test_pairing_perfect(cube):
    K, L = cube
    rep = pairing_matrix(K, L, 1, 1)
    assert rep.perfect_over_Q and rep.perfect_over_Z and rep.homology_rank == 20


def test_dual_involution_and_contraction(cube):
    K, L = cube
    DD = dual_system(dual_system(L))
    assert all(DD.t(a, b) == L.t(a, b) for a, b in L.transitions)
    F = pushforward_sheaf(L, 1)
    G = pushforward_sheaf(dual_system(L), 1, dual=True)
    om = omega_contraction(F)
    for s in K.all_simplices():
        assert F.rank(s) == G.rank(s)
        assert om(s).rows == G.rank(s)


def test_rerooting_keeps_gram(cube, gram):
    K, L = cube
    other = K.top[len(K.top) // 2]
    L2 = LocalSystem(K, 2, dict(L.transitions), base_cells=[other])
    names = ["equator-x", "equator-y", "goggle-x-0-0", "goggle-y-0-0", "tripod-0-0-0"]
    cs = [regauge_cycle(cube.cycles[n], L, L2) for n in names]
    idx = [CUBE_BASIS.index(n) for n in names]
    for a, i in zip(cs, idx):
        for b, j in zip(cs, idx):
            assert intersection_via_pairing(L2, a, b) == gram[i][j]


def test_rejects_crowded_points():
    with pytest.raises(ValueError):
        build_cube_k3(7, (2, 4))
