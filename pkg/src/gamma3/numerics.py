"""Dense complex-matrix primitives with explicit tolerance semantics.

Everything else in the package goes through these helpers, so the
conventions live here: matrices are ``complex128`` numpy arrays, norms are
spectral norms, and every numerical zero test is made against a
:class:`Tolerances` instance scaled by ``(1 + operand norm)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg


class InputError(ValueError):
    """Malformed input: wrong shape, non-finite entries, out-of-domain arguments."""


class ContractViolation(ValueError):
    """An operation was called with data breaking its precondition."""


class NumericalFailure(RuntimeError):
    """An iterative numerical procedure did not reach its tolerance."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class Tolerances:
    rank_tol: float = 1e-9
    psd_tol: float = 1e-8
    eq_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_tol", "psd_tol", "eq_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InputError(f"{name} must be strictly positive, got {value!r}")

    def scaled(self, factor: float) -> "Tolerances":
        return replace(
            self,
            rank_tol=self.rank_tol * factor,
            psd_tol=self.psd_tol * factor,
            eq_tol=self.eq_tol * factor,
        )


DEFAULT_TOL = Tolerances()


def as_matrix(A, square=True) -> np.ndarray:
    """Validate and convert ``A`` to a 2-D complex array."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    return M


def adjoint(A: np.ndarray) -> np.ndarray:
    return A.conj().T


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal column frame of a subspace of C^n (``k`` may be zero)."""

    frame: np.ndarray

    def __post_init__(self):
        F = np.asarray(self.frame, dtype=complex)
        if F.ndim != 2:
            raise InputError("frame must be a 2-D array")
        object.__setattr__(self, "frame", F)

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def k(self) -> int:
        return self.frame.shape[1]

    def __len__(self):
        return self.k

    def projector(self) -> np.ndarray:
        return self.frame @ adjoint(self.frame)

    def orthonormality_defect(self) -> float:
        if self.k == 0:
            return 0.0
        return op_norm(adjoint(self.frame) @ self.frame - np.eye(self.k))

    @classmethod
    def zero(cls, n: int) -> "SubspaceBasis":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "SubspaceBasis":
        return cls(np.eye(n, dtype=complex))

    def complement(self) -> "SubspaceBasis":
        """Orthonormal frame of the orthogonal complement."""
        n, k = self.frame.shape
        if k == 0:
            return SubspaceBasis.full(n)
        if k == n:
            return SubspaceBasis.zero(n)
        # trailing left singular vectors of an orthonormal frame span its complement
        u, _, _ = np.linalg.svd(self.frame, full_matrices=True)
        return SubspaceBasis(u[:, k:])


def op_norm(A) -> float:
    """Largest singular value of ``A`` (0 for empty matrices)."""
    M = as_matrix(A, square=False)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def hermitian_defect(A: np.ndarray) -> float:
    return op_norm(A - adjoint(A))


def min_eig_hermitian(A, tol: Tolerances = DEFAULT_TOL) -> float:
    """Smallest eigenvalue of the Hermitian part ``(A + A*)/2``.

    Raises :class:`ContractViolation` when ``A`` is grossly non-Hermitian,
    i.e. ``||A - A*|| > 10 * eq_tol * (1 + ||A||)``.
    """
    M = as_matrix(A)
    if M.shape[0] == 0:
        return float("inf")
    scale = 1.0 + op_norm(M)
    defect = hermitian_defect(M)
    if defect > 10 * tol.eq_tol * scale:
        raise ContractViolation(f"matrix is not Hermitian (defect {defect:.3e})")
    H = 0.5 * (M + adjoint(M))
    return float(np.linalg.eigvalsh(H)[0])


def null_space(M: np.ndarray, cutoff: float) -> np.ndarray:
    # right singular vectors with singular value <= cutoff, for any m x n M
    m, n = M.shape
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    if m == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    s_full = np.zeros(n)
    s_full[: len(s)] = s
    keep = s_full <= cutoff
    return adjoint(vh)[:, keep]


def kernel_basis(A, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of the numerical kernel of a square matrix.

    A right singular vector belongs to the kernel when its singular value is
    at most ``rank_tol * max(1, ||A||)``.
    """
    M = as_matrix(A)
    cutoff = tol.rank_tol * max(1.0, op_norm(M))
    return SubspaceBasis(null_space(M, cutoff))


def intersect(U: SubspaceBasis, V: SubspaceBasis, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Orthonormal basis of ``U ∩ V``.

    Computed as the numerical kernel of the stacked map
    ``x -> ((I - P_U) x, (I - P_V) x)``.
    """
    if U.ambient_dim != V.ambient_dim:
        raise InputError(f"ambient dimensions differ: {U.ambient_dim} vs {V.ambient_dim}")
    n = U.ambient_dim
    if U.k == 0 or V.k == 0:
        return SubspaceBasis.zero(n)
    eye = np.eye(n)
    stacked = np.vstack([eye - U.projector(), eye - V.projector()])
    return SubspaceBasis(null_space(stacked, tol.rank_tol))


def is_unitary(A, tol: Tolerances = DEFAULT_TOL) -> bool:
    M = as_matrix(A)
    eye = np.eye(M.shape[0])
    return (
        op_norm(adjoint(M) @ M - eye) <= tol.eq_tol
        and op_norm(M @ adjoint(M) - eye) <= tol.eq_tol
    )


def commutation_defect(A, B) -> float:
    """Relative commutator size ``||AB - BA|| / (1 + ||A|| ||B||)``."""
    A = as_matrix(A)
    B = as_matrix(B)
    if A.shape != B.shape:
        raise InputError(f"shape mismatch: {A.shape} vs {B.shape}")
    return op_norm(A @ B - B @ A) / (1.0 + op_norm(A) * op_norm(B))


def strict_lower_norm(T: np.ndarray) -> float:
    return op_norm(np.tril(T, -1))


def simultaneous_triangularize(family, tol: Tolerances = DEFAULT_TOL, seed=0, max_tries=5):
    """Common Schur basis for a commuting family of square matrices.

    The Schur vectors of a random linear combination of the family are
    applied to every member; a fresh combination is drawn when some member
    is left with an off-triangular residual above ``eq_tol * (1 + ||A_i||)``.

    Returns
    -------
    Q : ndarray
        Unitary matrix.
    triangles : list of ndarray
        ``Q* A_i Q`` for each member, upper triangular within tolerance. The
        diagonal tuples are the joint eigenvalues of the family.
    """
    mats = [as_matrix(A) for A in family]
    if not mats:
        raise InputError("empty family")
    n = mats[0].shape[0]
    if any(A.shape != (n, n) for A in mats):
        raise InputError("family members must share one square shape")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            d = commutation_defect(mats[i], mats[j])
            if d > tol.eq_tol:
                raise ContractViolation(f"members {i} and {j} do not commute (defect {d:.3e})")
    if n == 0:
        return np.zeros((0, 0), dtype=complex), [A.copy() for A in mats]

    norms = [op_norm(A) for A in mats]
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(max_tries):
        coef = rng.standard_normal(len(mats)) + 1j * rng.standard_normal(len(mats))
        C = sum(c * A / (1.0 + nrm) for c, A, nrm in zip(coef, mats, norms))
        _, Q = scipy.linalg.schur(C, output="complex")
        triangles = [adjoint(Q) @ A @ Q for A in mats]
        residuals = [strict_lower_norm(T) / (1.0 + nrm) for T, nrm in zip(triangles, norms)]
        worst = max(residuals)
        if worst <= tol.eq_tol:
            return Q, [np.triu(T) for T in triangles]
    raise NumericalFailure(
        f"simultaneous triangularization failed after {max_tries} tries "
        f"(residual {worst:.3e})",
        residual=worst,
    )


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR factor of a complex Gaussian.

    The diagonal of the triangular factor is made real-positive so that the
    output depends only on the random stream.
    """
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    phases = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1), 1)
    return Q * phases
