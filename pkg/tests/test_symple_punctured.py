import pytest

from tropcycles.cech_cohomology import cohomology
from tropcycles.constructible_sheaf import SheafFunctor, quotient_sheaf_S
from tropcycles.exact_algebra import ExactMatrix, determinant
from tropcycles.homology_engine import chain_complex, homology
from tropcycles.local_system import dual_system, transport
from tropcycles.model_library import (
    LatticePolygon, LatticeSimplex, SympleError, SympleModelSpec, build_conifold,
    build_symple_model, complex_CD_machinery, origin_vertex, prop_2_12_prediction,
    punctured_cech_S, punctured_h1, theorem_h1_check, threefold_vertex_cech,
)
from tropcycles.pairing_intersection import pairing_matrix
from tropcycles.punctured import boundary_system, complex_C, tensor_complex
from tropcycles.symple import codim2_ring

S, I = LatticeSimplex.standard, LatticeSimplex.interval
PAIRS = [(a, b) for a in (1, 2, 3) for b in (1, 2, 3) if a + b <= 5]


def ring_monodromy(model, s):
    ring = codim2_ring(model.complex, s)
    return transport(model.system, ring + ring[:1])


def test_lattice_polytope_validation():
    with pytest.raises(SympleError):
        LatticeSimplex([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(SympleError):
        LatticeSimplex([(0,)])
    with pytest.raises(SympleError):
        LatticePolygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    with pytest.raises(SympleError):
        SympleModelSpec(S(2), None)
    with pytest.raises(SympleError):
        SympleModelSpec(S(2), I(1), c=-1)


@pytest.mark.parametrize("length,k", [(1, 1), (2, 2), (3, 3)])
def test_two_dimensional_monodromy(length, k):
    M = build_symple_model(SympleModelSpec(I(length), I(1)))
    p = origin_vertex(M.complex)
    T = ring_monodromy(M, (p,))
    want = ExactMatrix([[1, k], [0, 1]], 2, 2)
    assert T in (want, ExactMatrix([[1, -k], [0, 1]], 2, 2))


def test_trivalent_discriminant_in_dimension_three():
    M = build_symple_model(SympleModelSpec(S(2), I(1)))
    K = M.complex
    p = origin_vertex(K)
    legs = [e for e in K.delta if len(e) == 2 and p in e]
    assert len(legs) == 3
    images = set()
    for e in legs:
        T = ring_monodromy(M, e)
        D = T - ExactMatrix.identity(3)
        col = next(tuple(c) for c in D.columns() if any(c))
        images.add(tuple(abs(x) for x in col))
    assert len(images) == 3
    assert all(determinant(Mx) == 1 for _, _, Mx in M.system.explicit_transitions())


def test_edge_data_matches_formula():
    spec = SympleModelSpec(S(2), S(2))
    for ((i, j), (k, l)), T in spec.edge_data.items():
        m, n = spec.m_vector(i, j), spec.n_vector(k, l)
        for v in ([1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 1]):
            got = T.apply(v)
            pair = sum(x * y for x, y in zip(v, n))
            assert got == [v[r] + pair * m[r] for r in range(4)]


def test_quotient_sheaf_stalks():
    for a, b, origin_rank in [(I(1), I(1), 1), (S(2), I(1), 1), (I(1), S(2), 2)]:
        M = build_symple_model(SympleModelSpec(a, b))
        Q = quotient_sheaf_S(M)
        K = M.complex
        assert Q.check_compatible()
        assert Q.rank((origin_vertex(K),)) == origin_rank
        assert all(Q.rank(s) == 0 for s in K.all_simplices() if s not in K.delta)
        wall = [s for s in K.delta if len(M.cotriangle_face(s)) == 2]
        assert wall and all(Q.rank(s) == 1 for s in wall)


@pytest.mark.parametrize("a,b", PAIRS)
def test_punctured_S_rank_table(a, b):
    C, ranks = punctured_cech_S(S(a), S(b))
    assert C.check_d_squared()
    want = prop_2_12_prediction(a, b)
    assert ranks + [0] * (len(want) - len(ranks)) == want[:max(len(ranks), len(want))]
    m = complex_CD_machinery(S(a), S(b))
    assert m["C"] == [int(k == 1) for k in range(b + 1)]
    assert m["D"] == [int(k == 0) for k in range(a + 1)]
    assert m["C_dual"] == [int(k == b - 1) for k in range(b + 1)]
    assert m["D_dual"] == [int(k == a) for k in range(a + 1)]
    assert m["D_bar"] == [a * int(k == a - 1) for k in range(a + 1)]
    assert m["tensor"] == [a * int(k == a + b - 2) for k in range(a + b + 1)]
    # term k of the Čech complex is term k+1 of the truncated tensor complex
    if a + b > 2:
        tail = m["tensor_dims"][1:]
        assert C.dims == tail[:len(C.dims)] and not any(tail[len(C.dims):])


def test_non_standard_simplices_give_same_ranks():
    big = LatticeSimplex([(0, 0), (2, 0), (0, 3)])
    assert punctured_cech_S(big, S(2))[1] == punctured_cech_S(S(2), S(2))[1]
    assert complex_C(big).dims == complex_C(S(2)).dims


def test_tensor_of_trivial_complexes():
    C = complex_C(I(1))
    T = tensor_complex(C, C)
    assert T.check_d_squared()


@pytest.mark.parametrize("tri,cot,kernel", [(S(2), I(1), 4), (I(1), S(2), 5)])
def test_threefold_vertex(tri, cot, kernel):
    rep = threefold_vertex_cech(build_symple_model(SympleModelSpec(tri, cot)))
    assert rep["kernel_reduced"] == kernel == rep["kernel_full"]
    assert rep["h1"] == 0


@pytest.mark.parametrize("a,b,c", [(2, 1, 0), (1, 2, 0), (1, 1, 1), (2, 2, 0),
                                   (3, 1, 0), (1, 3, 0), (2, 1, 1), (1, 2, 1), (1, 1, 2)])
def test_punctured_h1_vanishes(a, b, c):
    M = build_symple_model(SympleModelSpec(S(a), S(b), c))
    rep = theorem_h1_check(M)
    assert rep["ok"]
    p = origin_vertex(M.complex)
    if a + b + c == 3:
        assert punctured_h1(M.system, p, via="complement") == 0


def test_punctured_h1_refined_threefold():
    M = build_symple_model(SympleModelSpec(S(2), I(1)), fineness=1)
    rep = theorem_h1_check(M)
    assert rep["ok"] and len(rep["rows"]) > 1


def test_two_dimensional_puncture_is_not_zero():
    # the theorem needs n >= 3: around a focus-focus point H^1 survives
    M = build_symple_model(SympleModelSpec(I(1), I(1)))
    assert punctured_h1(M.system, origin_vertex(M.complex)) == 1


@pytest.fixture(scope="module")
def conifold():
    return build_conifold()


def test_conifold_groups(conifold):
    K, L = conifold
    for LL in (L, dual_system(L)):
        H = {h.degree: h.betti for h in cohomology(K, LL, 1, cover="vertex_star")}
        assert H[1] == 0
        h = homology(chain_complex(K, SheafFunctor(LL, 1)), "Q", degrees=[1], representatives=False)
        assert h[0].betti == 1
        Kd, Ld = boundary_system(LL)
        Hd = {x.degree: x.betti for x in cohomology(Kd, Ld, 1, cover="vertex_star")}
        assert Hd[1] == 1


def test_conifold_pairing_not_perfect(conifold):
    R = pairing_matrix(*conifold, 1, 1)
    assert (R.homology_rank, R.cohomology_rank) == (1, 0)
    assert not R.perfect_over_Q and not R.perfect_over_Z
