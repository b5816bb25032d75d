from fractions import Fraction

import pytest

from tropcycles.cech_cohomology import vertex_star_cech
from tropcycles.constructible_sheaf import SheafFunctor
from tropcycles.exact_algebra import ExactMatrix, bareiss_det
from tropcycles.homology_engine import ChainComplexOfSheaf, homology
from tropcycles.local_system import dual_system
from tropcycles.model_library import (
    build_flat_torus, build_goggles, orient_from_charts, perturbed_intersection_points,
    verify_affine,
)
from tropcycles.pairing_intersection import (
    DualBlockMap, IntersectionPoint, PairingError, contraction_matrix, eps_sign,
    gram_lattice_classify, intersection_number, intersection_via_pairing,
    kronecker, pairing_matrix,
)

SHIFTS = [(Fraction(1, 10), Fraction(1, 7)), (Fraction(-1, 9), Fraction(1, 8)),
          (Fraction(1, 8), Fraction(-1, 11))]


@pytest.fixture(scope="module")
def torus():
    T = build_flat_torus()
    verify_affine(T)
    return T


@pytest.fixture(scope="module", params=["shared_line", "parallel_lines"])
def goggle(request):
    M = build_goggles(request.param)
    verify_affine(M)
    orient_from_charts(M)
    return M


def test_eps_examples():
    assert eps_sign([[1, 0]], [[0, 1]]) == 1
    assert eps_sign([[0, 1]], [[1, 0]]) == -1
    assert eps_sign([[1, 1]], [[2, 2]]) == 0
    assert eps_sign([], [[1, 0], [0, 1]]) == 1
    assert eps_sign([[1, 0]], [[0, 1]], orientation=-1) == -1
    with pytest.raises(PairingError):
        eps_sign([[1, 0]], [])


def test_intersection_number_single_point():
    x = IntersectionPoint([[1, 0]], [[0, 1]], [1, 0], [0, 1])
    assert intersection_number([x]) == 1
    y = IntersectionPoint([[0, 1]], [[1, 0]], [1, 0], [1, 0])
    assert intersection_number([x, y]) == 1
    with pytest.raises(PairingError):
        IntersectionPoint([[1, 0]], [[0, 1], [1, 1]], [1], [1])


def test_contraction_is_unimodular():
    for n in (2, 3, 4):
        for p in range(n + 1):
            C = contraction_matrix(n, p)
            assert abs(bareiss_det(C.entries)) == 1


def test_gram_classify_examples():
    H = gram_lattice_classify([[0, 1], [1, 0]])
    assert H["even"] and H["unimodular"] and H["signature"] == (1, 1)
    A = gram_lattice_classify([[0, 1], [1, -2]])
    assert A["even"] and A["det"] == -1 and A["signature"] == (1, 1)
    assert gram_lattice_classify([[1]])["parity"] == "odd"
    e8 = [[2 if i == j else 0 for j in range(8)] for i in range(8)]
    for i, j in [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (4, 7)]:
        e8[i][j] = e8[j][i] = -1
    E = gram_lattice_classify([[-x for x in r] for r in e8])
    assert E["det"] == 1 and E["even"] and E["signature"] == (0, 8)
    assert gram_lattice_classify([[0, 0], [0, 1]])["nullity"] == 1
    with pytest.raises(PairingError):
        gram_lattice_classify([[0, 1], [0, 0]])


def test_goggle_pairing_perfect(goggle):
    K, L = goggle
    R = pairing_matrix(K, L, 1, 1)
    assert R.gram.rows == R.gram.cols == 1
    assert abs(R.gram.entries[0][0]) == 1
    assert R.perfect_over_Z and R.perfect_over_Q


def test_pairing_independent_of_representatives(goggle):
    K, L = goggle
    F = SheafFunctor(L, 1, "closed")
    C = ChainComplexOfSheaf(K, F)
    Z = vertex_star_cech(K, SheafFunctor(dual_system(L), 1, "open", dual=True))
    h = homology(C, degrees=[1])[0]
    z = homology(Z, degrees=[1])[0]
    cyc = C.cells_from_chain(1, h.free_gens[0])
    coc = Z.cells_from_cochain(1, z.free_gens[0])
    for j in range(0, Z.dims[0], 7):
        cob = Z.cells_from_cochain(1, Z.d[0].apply({j: 1}))
        assert kronecker(cyc, cob) == 0
    for j in range(0, C.dims[2], 7):
        bd = C.cells_from_chain(1, C.boundary_of(2, {j: 1}))
        assert kronecker(bd, coc) == 0


def test_dual_block_map_is_chain_map(goggle):
    for p in (0, 1, 2):
        assert DualBlockMap(goggle.system, p).chain_map_signs() == {0: -1, 1: 1}


def test_torus_calibration(torus):
    H, V = torus.cycles["horizontal"], torus.cycles["vertical"]
    for a, b in ((H, V), (V, H)):
        for sh in SHIFTS:
            assert intersection_number(perturbed_intersection_points(torus, a, b, sh)) == 1
        assert intersection_via_pairing(torus.system, a, b) == 1
    assert intersection_via_pairing(torus.system, H, H) == 0


def test_goggle_self_intersection_both_routes(goggle):
    G = goggle.cycles["goggle"]
    for sh in SHIFTS:
        assert intersection_number(perturbed_intersection_points(goggle, G, G, sh)) == -2
    assert intersection_via_pairing(goggle.system, G, G) == -2


def test_degree_mismatch_rejected(torus):
    from tropcycles.model_library import TropicalCycle
    H = torus.cycles["horizontal"]
    pt = TropicalCycle(0, 0, {(0,): [1]}, "point")
    with pytest.raises(PairingError):
        intersection_via_pairing(torus.system, H, pt)
