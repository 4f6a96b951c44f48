import cmath

import numpy as np
import pytest

from gamma3.gen import gen_gamma3_unitary, gen_normal_gamma3
from gamma3.numerics import ContractViolation, InputError, min_eig_hermitian, op_norm, random_unitary
from gamma3.opcore import (
    OperatorTriple,
    Poly3,
    eval_poly,
    pencil_scan,
    phi1,
    phi2,
    scale_rotate_triple,
    scan_grid,
    sup_norm_gamma3,
)
from gamma3.points import sym3


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_commuting_triple(rng, n):
    # polynomials in one matrix commute
    A = crandn(rng, n, n) / np.sqrt(n)
    return OperatorTriple(A, A @ A + 0.5 * A, 0.3 * A @ A @ A - 1j * np.eye(n))


# ---- OperatorTriple --------------------------------------------------------

def test_triple_checks_commutation():
    N = np.array([[0, 1], [0, 0]])
    with pytest.raises(ContractViolation):
        OperatorTriple(N, N.T, np.eye(2))
    T = OperatorTriple(N, N.T, np.eye(2), check=False)
    assert max(T.commutation_defects) == pytest.approx(0.5)
    with pytest.raises(InputError):
        OperatorTriple(np.eye(2), np.eye(3), np.eye(2))


def test_triple_owns_its_data():
    A = np.eye(2, dtype=complex)
    T = OperatorTriple(A, A, A)
    A[0, 0] = 5
    assert T.S1[0, 0] == 1


# ---- pencils ----------------------------------------------------------------

def test_phi_examples():
    Z = OperatorTriple.zero(2)
    assert np.allclose(phi1(Z), 9 * np.eye(2))
    assert np.allclose(phi2(Z), 9 * np.eye(2))
    T = OperatorTriple.scalar(3, 3, 1)
    assert phi1(T)[0, 0] == pytest.approx(0.0, abs=1e-14)
    assert phi2(T)[0, 0] == pytest.approx(0.0, abs=1e-14)
    w = cmath.exp(0.4j)
    assert phi1(OperatorTriple.scalar(0, 0, w))[0, 0] == pytest.approx(0.0, abs=1e-14)


def test_phi_scalar_formula():
    # 9(1 - |p|^2) + |s1|^2 - |s2|^2 - 6 Re(s1 - conj(s2) p)
    rng = np.random.default_rng(0)
    for _ in range(50):
        s1, s2, p = crandn(rng, 3)
        want = 9 * (1 - abs(p) ** 2) + abs(s1) ** 2 - abs(s2) ** 2 - 6 * (s1 - s2.conjugate() * p).real
        assert phi1(OperatorTriple.scalar(s1, s2, p))[0, 0] == pytest.approx(want, abs=1e-12)


def test_phi_swap_and_hermitian():
    rng = np.random.default_rng(1)
    for n in (1, 3, 6):
        T = random_commuting_triple(rng, n)
        swapped = OperatorTriple(T.S2, T.S1, T.P)
        assert np.array_equal(phi2(T), phi1(swapped))
        for F in (phi1(T), phi2(T)):
            assert op_norm(F - F.conj().T) <= 1e-13 * (1 + op_norm(F))


def test_scale_rotate_examples():
    rng = np.random.default_rng(2)
    T = random_commuting_triple(rng, 3)
    same = scale_rotate_triple(T, 1)
    assert all(np.array_equal(a, b) for a, b in zip(same.matrices(), T.matrices()))
    zero = scale_rotate_triple(T, 0)
    assert all(not np.any(X) for X in zero.matrices())
    w = cmath.exp(1.1j)
    R = scale_rotate_triple(T, w)
    assert np.allclose(R.S2, w**2 * T.S2) and np.allclose(R.P, w**3 * T.P)
    assert max(R.commutation_defects) <= 1e-14
    with pytest.raises(InputError):
        scale_rotate_triple(T, 1.01)


def test_pencil_scan_examples():
    res = pencil_scan(OperatorTriple.zero(2))
    assert res.global_min == pytest.approx(9.0)
    assert res.global_min == min(min(res.min_eigs_phi1), min(res.min_eigs_phi2))
    assert len(res.grid) == 1 + 8 * 24

    res = pencil_scan(OperatorTriple.scalar(0, 0, 2))
    assert res.global_min <= -27 + 1e-9

    for seed in range(5):
        T, _ = gen_gamma3_unitary(4, seed)
        assert pencil_scan(T).global_min >= -1e-8


def test_scalar_pencil_nonnegative_on_tridisc():
    # scalar instance of the pencil positivity, checked pointwise
    rng = np.random.default_rng(3)
    grid = scan_grid(8, 24)
    for _ in range(200):
        z = np.sqrt(rng.uniform(size=3)) * np.exp(2j * np.pi * rng.uniform(size=3))
        T = OperatorTriple.scalar(*sym3(*z))
        for a in grid[::7]:
            Ta = scale_rotate_triple(T, a)
            assert phi1(Ta)[0, 0].real >= -1e-12
            assert phi2(Ta)[0, 0].real >= -1e-12


def test_pencil_scan_rotation_covariant():
    T, _ = gen_normal_gamma3(4, 11)
    base = pencil_scan(T).global_min
    for k in range(24):
        w = cmath.exp(2j * np.pi * k / 24)
        assert pencil_scan(scale_rotate_triple(T, w)).global_min == pytest.approx(base, abs=1e-12)


# ---- polynomial calculus ---------------------------------------------------------

def test_eval_poly_examples():
    rng = np.random.default_rng(5)
    T = random_commuting_triple(rng, 3)
    assert np.allclose(eval_poly(Poly3({(0, 0, 0): 1}), T), np.eye(3))
    S = OperatorTriple.scalar(3, 3, 1)
    assert eval_poly(Poly3.monomial(1, 0, 0), S)[0, 0] == pytest.approx(3)


def test_eval_poly_diagonal_oracle():
    rng = np.random.default_rng(6)
    d = crandn(rng, 3, 5)
    T = OperatorTriple(np.diag(d[0]), np.diag(d[1]), np.diag(d[2]))
    f = Poly3({(1, 0, 1): 1, (0, 1, 0): -1})
    got = np.diag(eval_poly(f, T))
    want = d[0] * d[2] - d[1]
    assert np.allclose(got, want, atol=1e-13)
    g = Poly3.random(3, rng)
    assert np.allclose(np.diag(eval_poly(g, T)), g(d[0], d[1], d[2]), atol=1e-12)


def test_eval_poly_is_algebra_map():
    rng = np.random.default_rng(7)
    for n in range(1, 7):
        T = random_commuting_triple(rng, n)
        f, g = Poly3.random(2, rng), Poly3.random(2, rng)
        lhs = eval_poly(f * g, T)
        rhs = eval_poly(f, T) @ eval_poly(g, T)
        assert op_norm(lhs - rhs) <= 1e-9 * max(1.0, op_norm(rhs))


def test_eval_poly_unitarily_covariant():
    rng = np.random.default_rng(8)
    T = random_commuting_triple(rng, 4)
    W = random_unitary(4, rng)
    f = Poly3.random(3, rng)
    lhs = eval_poly(f, T.conjugate_by(W))
    rhs = W.conj().T @ eval_poly(f, T) @ W
    assert op_norm(lhs - rhs) <= 1e-10 * op_norm(rhs)


def test_poly_json_round_trip():
    f = Poly3({(1, 0, 2): 1 - 2j, (0, 0, 0): 0.5})
    g = Poly3.from_json(f.to_json())
    assert g.coeffs == f.coeffs
    assert f.total_degree == 3
    with pytest.raises(InputError):
        Poly3.from_json([{"e": [1, 0, 0]}])
    with pytest.raises(InputError):
        Poly3({(1, -1, 0): 1})


# ---- sup norm ------------------------------------------------------------------

def test_sup_norm_examples():
    assert sup_norm_gamma3(Poly3.monomial(0, 0, 1)) == pytest.approx(1.0, abs=1e-9)
    assert 3.0 - 1e-2 <= sup_norm_gamma3(Poly3.monomial(1, 0, 0), 64) <= 3.0 + 1e-12
    assert sup_norm_gamma3(Poly3({(0, 0, 0): 1})) == 1.0
    with pytest.raises(InputError):
        sup_norm_gamma3(Poly3.monomial(1, 0, 0), 4)


def test_sup_norm_matches_brute_force_grid():
    # full grid^3 evaluation, no symmetry reduction
    rng = np.random.default_rng(9)
    n = 12
    z = np.exp(2j * np.pi * np.arange(n) / n)
    Z1, Z2, Z3 = np.meshgrid(z, z, z, indexing="ij")
    s1, s2, p = Z1 + Z2 + Z3, Z1 * Z2 + Z2 * Z3 + Z3 * Z1, Z1 * Z2 * Z3
    for _ in range(10):
        f = Poly3.random(3, rng)
        assert sup_norm_gamma3(f, n) == pytest.approx(np.max(np.abs(f(s1, s2, p))), rel=1e-12)


def test_sup_norm_nondecreasing_under_doubling():
    rng = np.random.default_rng(10)
    for _ in range(10):
        f = Poly3.random(3, rng)
        vals = [sup_norm_gamma3(f, g) for g in (8, 16, 32, 64)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_sup_norm_rotation_invariant_on_aligned_grid():
    rng = np.random.default_rng(11)
    f = Poly3.random(3, rng)
    w = cmath.exp(2j * np.pi * 5 / 32)
    assert sup_norm_gamma3(f.rotated(w), 32) == pytest.approx(sup_norm_gamma3(f, 32), rel=1e-12)


def test_von_neumann_on_normal_triples():
    rng = np.random.default_rng(12)
    for seed in range(5):
        T, _ = gen_normal_gamma3(5, seed)
        for _ in range(5):
            f = Poly3.random(3, rng)
            assert op_norm(eval_poly(f, T)) <= sup_norm_gamma3(f) * 1.01 + 1e-8


def test_pencil_scan_matches_direct_evaluation():
    rng = np.random.default_rng(13)
    T = random_commuting_triple(rng, 4)
    res = pencil_scan(T, 3, 5)
    for a, m1, m2 in zip(res.grid, res.min_eigs_phi1, res.min_eigs_phi2):
        Ta = scale_rotate_triple(T, a)
        assert m1 == pytest.approx(min_eig_hermitian(phi1(Ta)), abs=1e-10)
        assert m2 == pytest.approx(min_eig_hermitian(phi2(Ta)), abs=1e-10)


@pytest.mark.parametrize("grid", [8, 16, 32, 64, 96])
def test_sup_norm_of_coordinates_never_exceeds_bound(grid):
    # exact values 3, 3, 1 attained at z = (1, 1, 1); rounding must not overshoot
    for exps, bound in (((1, 0, 0), 3.0), ((0, 1, 0), 3.0), ((0, 0, 1), 1.0)):
        v = sup_norm_gamma3(Poly3.monomial(*exps), grid)
        assert bound - 1e-12 <= v <= bound
