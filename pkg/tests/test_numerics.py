import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamma3.numerics import (
    ContractViolation,
    InputError,
    NumericalFailure,
    SubspaceBasis,
    Tolerances,
    commutation_defect,
    intersect,
    is_unitary,
    kernel_basis,
    min_eig_hermitian,
    op_norm,
    random_unitary,
    simultaneous_triangularize,
)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def e(i, n=3):
    v = np.zeros((n, 1), dtype=complex)
    v[i] = 1
    return v


# ---- op_norm ---------------------------------------------------------------

def test_op_norm_examples():
    assert op_norm(np.eye(3)) == pytest.approx(1.0)
    assert op_norm(np.zeros((3, 3))) == 0.0
    assert op_norm(np.diag([3, 0.5])) == pytest.approx(3.0)


def test_op_norm_rejects_non_finite():
    with pytest.raises(InputError):
        op_norm(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(InputError):
        op_norm(np.array([[np.inf]]))


def test_op_norm_adjoint_invariant():
    rng = np.random.default_rng(0)
    for _ in range(50):
        A = crandn(rng, 5, 5)
        assert op_norm(A.conj().T) == pytest.approx(op_norm(A), rel=1e-12)


# ---- min_eig_hermitian -----------------------------------------------------

def test_min_eig_examples():
    assert min_eig_hermitian(9 * np.eye(2)) == pytest.approx(9.0)
    assert min_eig_hermitian(np.diag([1.0, -2.0])) == pytest.approx(-2.0)
    assert min_eig_hermitian(np.array([[2.0, 1.0], [1.0, 2.0]])) == pytest.approx(1.0)


def test_min_eig_symmetrizes_small_defects():
    H = np.array([[2.0, 1.0], [1.0, 2.0]], dtype=complex)
    H[0, 1] += 1e-10
    assert min_eig_hermitian(H) == pytest.approx(1.0, abs=1e-9)


def test_min_eig_rejects_gross_asymmetry():
    with pytest.raises(ContractViolation):
        min_eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


# ---- kernel_basis ----------------------------------------------------------

def test_kernel_examples():
    K = kernel_basis(np.diag([1.0, 0.0]))
    assert K.k == 1
    assert abs(K.frame[1, 0]) == pytest.approx(1.0)
    assert kernel_basis(np.eye(4)).k == 0
    K = kernel_basis(e(0) @ e(0).conj().T)
    assert K.k == 2
    assert np.allclose(K.frame[0], 0)
    assert K.orthonormality_defect() < 1e-12


def test_kernel_reapply_bound():
    rng = np.random.default_rng(1)
    tol = Tolerances()
    for r in range(0, 6):
        A = crandn(rng, 6, r) @ crandn(rng, r, 6)
        K = kernel_basis(A, tol)
        assert K.k == 6 - r
        bound = tol.rank_tol * max(1, op_norm(A)) * np.sqrt(max(K.k, 1))
        assert op_norm(A @ K.frame) <= bound


# ---- intersect -------------------------------------------------------------

def test_intersect_examples():
    U = SubspaceBasis(np.hstack([e(0), e(1)]))
    V = SubspaceBasis(np.hstack([e(1), e(2)]))
    W = intersect(U, V)
    assert W.k == 1
    assert abs(W.frame[1, 0]) == pytest.approx(1.0)

    rng = np.random.default_rng(2)
    Q, _ = np.linalg.qr(crandn(rng, 3, 2))
    V = SubspaceBasis(Q)
    W = intersect(SubspaceBasis.full(3), V)
    assert W.k == 2
    assert np.allclose(W.projector(), V.projector(), atol=1e-12)


def _dist(x, S):
    return np.linalg.norm(x - S.projector() @ x)


def test_intersect_random_planes_projector_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        U = SubspaceBasis(np.linalg.qr(crandn(rng, 3, 2))[0])
        V = SubspaceBasis(np.linalg.qr(crandn(rng, 3, 2))[0])
        W = intersect(U, V)
        assert W.k == 1
        x = W.frame[:, 0]
        assert _dist(x, U) + _dist(x, V) <= 1e-9


def test_intersect_symmetric_up_to_frame():
    rng = np.random.default_rng(4)
    common = crandn(rng, 5, 2)
    for _ in range(10):
        U = SubspaceBasis(np.linalg.qr(np.hstack([common, crandn(rng, 5, 1)]))[0])
        V = SubspaceBasis(np.linalg.qr(np.hstack([common, crandn(rng, 5, 1)]))[0])
        A, B = intersect(U, V), intersect(V, U)
        assert A.k == B.k == 2
        assert op_norm(A.projector() - B.projector()) <= 1e-9


def test_intersect_ambient_mismatch():
    with pytest.raises(InputError):
        intersect(SubspaceBasis.full(2), SubspaceBasis.full(3))


# ---- is_unitary ------------------------------------------------------------

def test_is_unitary_examples():
    assert is_unitary(np.diag([1, np.exp(0.7j)]))
    assert not is_unitary(np.diag([1, 0.5]))
    v = np.array([[1], [2j], [-1]]) / np.sqrt(6)
    H = np.eye(3) - 2 * v @ v.conj().T
    assert np.allclose(H @ H.conj().T, np.eye(3))
    assert is_unitary(H)


# ---- commutation_defect ----------------------------------------------------

def test_commutation_defect_examples():
    rng = np.random.default_rng(5)
    A = crandn(rng, 4, 4)
    assert commutation_defect(A, A) == pytest.approx(0.0, abs=1e-14)
    assert commutation_defect(np.diag([1, 2j]), np.diag([3, -1])) == 0.0
    N = np.array([[0, 1], [0, 0]])
    assert commutation_defect(N, N.T) == pytest.approx(0.5)
    with pytest.raises(InputError):
        commutation_defect(np.eye(2), np.eye(3))


# ---- simultaneous_triangularize --------------------------------------------

def _sorted_tuples(tuples):
    return sorted(tuple(np.round(np.asarray(t), 6)) for t in tuples)


def test_triangularize_diagonal_family():
    D1, D2 = np.diag([1, 2, 3]), np.diag([4j, 5, 6])
    Q, (T1, T2) = simultaneous_triangularize([D1, D2])
    assert is_unitary(Q)
    got = sorted(zip(np.round(np.diag(T1), 9), np.round(np.diag(T2), 9)), key=lambda t: t[0].real)
    assert got == [(1, 4j), (2, 5), (3, 6)]


def test_triangularize_single_matrix_is_schur():
    rng = np.random.default_rng(6)
    A = crandn(rng, 5, 5)
    Q, (T,) = simultaneous_triangularize([A])
    assert np.allclose(Q @ T @ Q.conj().T, A)
    assert np.allclose(np.sort_complex(np.diag(T)), np.sort_complex(np.linalg.eigvals(A)))


def test_triangularize_a_and_a_squared():
    rng = np.random.default_rng(7)
    A = crandn(rng, 5, 5)
    _, (T1, T2) = simultaneous_triangularize([A, A @ A])
    lam = np.linalg.eigvals(A)
    expected = _sorted_tuples(zip(lam, lam**2))
    assert _sorted_tuples(zip(np.diag(T1), np.diag(T2))) == expected


def test_triangularize_normal_family_unitarily_invariant():
    rng = np.random.default_rng(8)
    d = [crandn(rng, 6) for _ in range(3)]
    W = random_unitary(6, rng)
    fam = [W @ np.diag(x) @ W.conj().T for x in d]
    _, tri = simultaneous_triangularize(fam)
    base = np.array(sorted(zip(*[np.diag(T) for T in tri]), key=lambda t: (t[0].real, t[0].imag)))
    for _ in range(5):
        V = random_unitary(6, rng)
        _, tri2 = simultaneous_triangularize([V.conj().T @ X @ V for X in fam])
        other = np.array(sorted(zip(*[np.diag(T) for T in tri2]), key=lambda t: (t[0].real, t[0].imag)))
        assert np.max(np.abs(base - other)) <= 1e-8


def test_triangularize_rejects_non_commuting():
    with pytest.raises(ContractViolation):
        simultaneous_triangularize([np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])])


def test_triangularize_failure_carries_residual(monkeypatch):
    import gamma3.numerics as nm

    # let a non-commuting pair past the precondition gate
    monkeypatch.setattr(nm, "commutation_defect", lambda A, B: 0.0)
    A = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(NumericalFailure) as info:
        nm.simultaneous_triangularize([A, A.T.copy()], max_tries=2)
    assert info.value.residual > 1e-3


# ---- random_unitary ---------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.integers(1, 9), st.integers(0, 2**31 - 1))
def test_random_unitary_is_unitary_and_deterministic(n, seed):
    U = random_unitary(n, np.random.default_rng(seed))
    assert is_unitary(U)
    assert np.array_equal(U, random_unitary(n, np.random.default_rng(seed)))


def test_tolerances_must_be_positive():
    with pytest.raises(InputError):
        Tolerances(rank_tol=0)
    assert Tolerances().scaled(10).eq_tol == pytest.approx(1e-7)
