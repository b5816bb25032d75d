import random

import pytest

from tropcycles.exact_algebra import (
    ExactMatrix, Lattice, bareiss_rank, cokernel_invariants, dual_lattice_map,
    exterior_power_matrix, kernel_lattice, minors_gcd, smith_divisors,
    smith_normal_form, solve_integer, wedge_product, wedge_ratio,
)


def _rand(rng, m, n, lo=-9, hi=9):
    return ExactMatrix([[rng.randint(lo, hi) for _ in range(n)] for _ in range(m)], m, n)


def test_snf_identity():
    s = smith_normal_form(ExactMatrix.identity(2))
    assert s.divisors == (1, 1) and s.rank == 2


def test_snf_small_example():
    assert smith_normal_form([[2, 4], [6, 8]]).divisors == (2, 4)


def test_snf_focus_focus():
    s = smith_normal_form([[0, 1], [0, 0]])
    assert s.divisors == (1,)
    assert kernel_lattice([[0, 1], [0, 0]]) == Lattice(2, [[1, 0]])


def test_snf_empty():
    assert smith_normal_form(ExactMatrix.zeros(0, 3)).divisors == ()
    assert smith_normal_form(ExactMatrix.zeros(2, 0)).rank == 0


def test_snf_against_minor_gcd_oracle():
    rng = random.Random(20240611)
    for _ in range(200):
        m, n = rng.randint(1, 6), rng.randint(1, 6)
        A = _rand(rng, m, n)
        s = smith_normal_form(A)
        assert s.U @ A @ s.V == s.diagonal(m, n)
        assert s.U @ s.U_inv == ExactMatrix.identity(m)
        assert s.V @ s.V_inv == ExactMatrix.identity(n)
        d = s.divisors
        assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1))
        assert s.rank == bareiss_rank(A)
        prod = 1
        for k in range(1, s.rank + 1):
            prod *= d[k - 1]
            assert minors_gcd(A, k) == prod
        assert minors_gcd(A, s.rank + 1) == 0 if s.rank < min(m, n) else True


def test_snf_deterministic():
    rng = random.Random(5)
    A = _rand(rng, 5, 4)
    a, b = smith_normal_form(A), smith_normal_form(A)
    assert a.U == b.U and a.V == b.V


def test_snf_large_entries_exact():
    A = ExactMatrix([[10**40 + 1, 3], [7, 10**30]], 2, 2)
    s = smith_normal_form(A)
    assert s.U @ A @ s.V == s.diagonal(2, 2)


def test_kernel_zero_matrix_full():
    assert kernel_lattice(ExactMatrix.zeros(3, 3)) == Lattice.full(3)


def test_kernel_two_transvections_trivial():
    # T_m v = v + det(m, v) m for m = (1,1) and (1,-1)
    def tminus(m):
        a, b = m
        return [[-b * a, a * a], [-b * b, a * b]]
    A = ExactMatrix(tminus((1, 1)) + tminus((1, -1)), 4, 2)
    assert kernel_lattice(A).rank == 0


def test_kernel_always_saturated():
    rng = random.Random(3)
    for _ in range(50):
        A = _rand(rng, rng.randint(1, 4), rng.randint(1, 6), -4, 4)
        K = kernel_lattice(A)
        assert K.saturated
        if K.rank:
            assert all(d == 1 for d in smith_divisors(K.basis))
            assert (A @ K.basis).is_zero()


def test_cokernel():
    assert cokernel_invariants([[2]]) == (0, (2,))
    circle = [[-1, 0, 1], [1, -1, 0], [0, 1, -1]]
    assert cokernel_invariants(circle) == (1, ())


def test_exterior_powers():
    assert exterior_power_matrix(ExactMatrix.identity(3), 2) == ExactMatrix.identity(3)
    T = ExactMatrix([[1, 2], [3, 4]], 2, 2)
    assert exterior_power_matrix(T, 1) == T
    D = ExactMatrix([[1, 0, 0], [0, 2, 0], [0, 0, 3]], 3, 3)
    assert exterior_power_matrix(D, 2) == ExactMatrix([[2, 0, 0], [0, 3, 0], [0, 0, 6]], 3, 3)
    with pytest.raises(ValueError):
        exterior_power_matrix(T, 3)


def _rand_gl3(rng):
    M = ExactMatrix.identity(3)
    for _ in range(6):
        i, j = rng.sample(range(3), 2)
        E = [[int(a == b) for b in range(3)] for a in range(3)]
        E[i][j] = rng.choice([-2, -1, 1, 2])
        M = M @ ExactMatrix(E, 3, 3)
    return M


def test_exterior_power_functorial():
    rng = random.Random(11)
    for _ in range(20):
        S, T = _rand_gl3(rng), _rand_gl3(rng)
        for p in range(4):
            assert exterior_power_matrix(S @ T, p) == \
                exterior_power_matrix(S, p) @ exterior_power_matrix(T, p)


def test_wedge_ratio_examples():
    assert wedge_ratio([1, 0], [0, 1]) == 1
    assert wedge_ratio([0, 1], [1, 0]) == -1
    assert wedge_ratio([1, 1], [0, 1]) == 1


def test_wedge_ratio_graded_symmetry():
    rng = random.Random(2)
    from math import comb
    for n in range(1, 5):
        for p in range(n + 1):
            xi = [rng.randint(-3, 3) for _ in range(comb(n, p))]
            eta = [rng.randint(-3, 3) for _ in range(comb(n, n - p))]
            assert wedge_ratio(xi, eta, 1, n) == (-1) ** (p * (n - p)) * wedge_ratio(eta, xi, 1, n)


def test_wedge_product_associative():
    e = lambda i: [int(k == i) for k in range(3)]
    a = wedge_product(wedge_product(e(0), 1, e(1), 1, 3), 2, e(2), 1, 3)
    assert a == [1]


def test_dual_lattice():
    assert dual_lattice_map(Lattice.full(3)) == Lattice.full(3)
    assert dual_lattice_map(Lattice(2, [[1, 0]])).rank == 1
    with pytest.raises(ValueError):
        dual_lattice_map(Lattice(2, [[2, 0]]))


def test_lattice_hermite_equality():
    assert Lattice(2, [[1, 1], [0, 1]]) == Lattice.full(2)
    assert Lattice(2, [[2, 0]]).saturated is False


def test_solve_integer():
    assert solve_integer([[2, 0], [0, 3]], [4, 9]) == [2, 3]
    assert solve_integer([[2]], [3]) is None
