"""Operator triples, the pencils Phi_1 / Phi_2, and polynomial functional calculus."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .numerics import (
    DEFAULT_TOL,
    ContractViolation,
    InputError,
    Tolerances,
    adjoint,
    as_matrix,
    commutation_defect,
    op_norm,
)

DEFAULT_RADIAL_STEPS = 8
DEFAULT_ANGULAR_STEPS = 24
DEFAULT_SUP_GRID = 64
# grid points sit just inside the torus so rounding cannot lift |f| above the true sup
SUP_GRID_RADIUS = 1.0 - 1e-14


@dataclass(frozen=True, eq=False)
class OperatorTriple:
    """A triple ``(S1, S2, P)`` of same-size square matrices.

    Construction checks pairwise commutation against ``tol.eq_tol`` unless
    ``check=False``; batteries and the decomposition accept unchecked
    triples so that non-commuting input becomes a reported failure rather
    than an exception.
    """

    S1: np.ndarray
    S2: np.ndarray
    P: np.ndarray
    check: bool = True
    tol: Tolerances = DEFAULT_TOL
    commutation_defects: tuple = field(init=False)

    def __post_init__(self):
        mats = [as_matrix(X) for X in (self.S1, self.S2, self.P)]
        if not (mats[0].shape == mats[1].shape == mats[2].shape):
            raise InputError(f"triple shapes differ: {[m.shape for m in mats]}")
        for name, M in zip(("S1", "S2", "P"), mats):
            M = M.copy()
            M.setflags(write=False)
            object.__setattr__(self, name, M)
        n = mats[0].shape[0]
        if n == 0:
            defects = (0.0, 0.0, 0.0)
        else:
            defects = (
                commutation_defect(self.S1, self.S2),
                commutation_defect(self.S1, self.P),
                commutation_defect(self.S2, self.P),
            )
        object.__setattr__(self, "commutation_defects", defects)
        if self.check and max(defects) > self.tol.eq_tol:
            raise ContractViolation(f"triple does not commute (defects {defects})")

    @property
    def n(self) -> int:
        return self.S1.shape[0]

    @classmethod
    def scalar(cls, s1, s2, p, n=1, **kw) -> "OperatorTriple":
        eye = np.eye(n, dtype=complex)
        return cls(s1 * eye, s2 * eye, p * eye, **kw)

    @classmethod
    def zero(cls, n, **kw) -> "OperatorTriple":
        return cls.scalar(0, 0, 0, n, **kw)

    def matrices(self):
        return (self.S1, self.S2, self.P)

    def adjoint(self) -> "OperatorTriple":
        return OperatorTriple(adjoint(self.S1), adjoint(self.S2), adjoint(self.P), check=False)

    def conjugate_by(self, W) -> "OperatorTriple":
        """``(W* S1 W, W* S2 W, W* P W)``."""
        Wh = adjoint(W)
        return OperatorTriple(*(Wh @ X @ W for X in self.matrices()), check=False, tol=self.tol)


def _re(X):
    return 0.5 * (X + adjoint(X))


def phi1(T: OperatorTriple) -> np.ndarray:
    """``9(I - P*P) + (S1*S1 - S2*S2) - 6 Re(S1 - S2*P)``."""
    S1, S2, P = T.matrices()
    eye = np.eye(T.n)
    return (
        9 * (eye - adjoint(P) @ P)
        + (adjoint(S1) @ S1 - adjoint(S2) @ S2)
        - 6 * _re(S1 - adjoint(S2) @ P)
    )


def phi2(T: OperatorTriple) -> np.ndarray:
    """``9(I - P*P) + (S2*S2 - S1*S1) - 6 Re(S2 - S1*P)``."""
    S1, S2, P = T.matrices()
    return phi1(OperatorTriple(S2, S1, P, check=False))


def scale_rotate_triple(T: OperatorTriple, alpha) -> OperatorTriple:
    """``(alpha S1, alpha^2 S2, alpha^3 P)`` for ``|alpha| <= 1``."""
    alpha = complex(alpha)
    if abs(alpha) > 1 + 1e-12:
        raise InputError(f"|alpha| must not exceed 1, got {abs(alpha)!r}")
    return OperatorTriple(
        alpha * T.S1, alpha**2 * T.S2, alpha**3 * T.P, check=False, tol=T.tol
    )


@dataclass
class PencilScanResult:
    grid: list
    min_eigs_phi1: list
    min_eigs_phi2: list
    global_min: float
    argmin: complex = 0j

    def to_dict(self):
        return {
            "grid": [[a.real, a.imag] for a in self.grid],
            "min_eigs_phi1": self.min_eigs_phi1,
            "min_eigs_phi2": self.min_eigs_phi2,
            "global_min": self.global_min,
            "argmin": [self.argmin.real, self.argmin.imag],
        }


def scan_grid(radial_steps=DEFAULT_RADIAL_STEPS, angular_steps=DEFAULT_ANGULAR_STEPS):
    """``alpha = r e^{i theta}`` with ``r = j / radial_steps`` and ``theta = 2 pi k / angular_steps``.

    ``alpha = 0`` appears once.
    """
    if radial_steps < 1 or angular_steps < 1:
        raise InputError("scan grid needs at least one radial and one angular step")
    grid = [0j]
    angles = np.exp(2j * np.pi * np.arange(angular_steps) / angular_steps)
    for j in range(1, radial_steps + 1):
        r = j / radial_steps
        grid.extend(complex(r * w) for w in angles)
    return grid


def _pencil_family(T: OperatorTriple):
    # products entering phi_i(alpha S1, alpha^2 S2, alpha^3 P), computed once
    S1, S2, P = T.matrices()
    h = adjoint
    eye = np.eye(T.n)
    PP, A11, A22 = h(P) @ P, h(S1) @ S1, h(S2) @ S2
    B1, B2 = h(S2) @ P, h(S1) @ P

    def at(alpha):
        a2 = abs(alpha) ** 2
        X1 = alpha * (S1 - a2 * a2 * B1)
        X2 = alpha**2 * (S2 - a2 * B2)
        base = 9 * (eye - a2**3 * PP)
        F1 = base + a2 * A11 - a2**2 * A22 - 3 * (X1 + h(X1))
        F2 = base + a2**2 * A22 - a2 * A11 - 3 * (X2 + h(X2))
        return F1, F2

    return at


def _min_eig(F):
    return float(np.linalg.eigvalsh(0.5 * (F + adjoint(F)))[0])


def pencil_scan(
    T: OperatorTriple,
    radial_steps: int = DEFAULT_RADIAL_STEPS,
    angular_steps: int = DEFAULT_ANGULAR_STEPS,
) -> PencilScanResult:
    """Smallest eigenvalues of both pencils over the scaled-rotation grid.

    A negative ``global_min`` certifies that ``T`` is not a
    Gamma_3-contraction; a non-negative one proves nothing.
    """
    grid = scan_grid(radial_steps, angular_steps)
    if T.n == 0:
        return PencilScanResult(grid, [np.inf] * len(grid), [np.inf] * len(grid), np.inf)
    at = _pencil_family(T)
    m1, m2 = [], []
    for alpha in grid:
        F1, F2 = at(alpha)
        m1.append(_min_eig(F1))
        m2.append(_min_eig(F2))
    both = np.minimum(m1, m2)
    i = int(np.argmin(both))
    return PencilScanResult(grid, m1, m2, float(both[i]), grid[i])


class Poly3:
    """Polynomial in ``(s1, s2, p)`` stored as ``{(i, j, k): coefficient}``."""

    def __init__(self, coeffs=None):
        self.coeffs = {}
        for e, c in (coeffs or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != 3 or min(e) < 0:
                raise InputError(f"bad exponent {e!r}")
            c = complex(c)
            if not np.isfinite(c):
                raise InputError("non-finite coefficient")
            if c != 0:
                self.coeffs[e] = self.coeffs.get(e, 0) + c

    @property
    def total_degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def max_exponents(self):
        if not self.coeffs:
            return (0, 0, 0)
        return tuple(max(e[i] for e in self.coeffs) for i in range(3))

    @classmethod
    def monomial(cls, i, j, k, c=1.0) -> "Poly3":
        return cls({(i, j, k): c})

    @classmethod
    def random(cls, degree, rng: np.random.Generator) -> "Poly3":
        """Every monomial of total degree <= ``degree`` with a coefficient uniform on the unit disk."""
        exps = [
            (i, j, k)
            for i in range(degree + 1)
            for j in range(degree + 1 - i)
            for k in range(degree + 1 - i - j)
        ]
        r = np.sqrt(rng.uniform(size=len(exps)))
        theta = rng.uniform(0, 2 * np.pi, size=len(exps))
        return cls(dict(zip(exps, r * np.exp(1j * theta))))

    def __call__(self, s1, s2, p):
        s1, s2, p = np.asarray(s1), np.asarray(s2), np.asarray(p)
        out = np.zeros(np.broadcast(s1, s2, p).shape, dtype=complex)
        for (i, j, k), c in self.coeffs.items():
            out = out + c * s1**i * s2**j * p**k
        return out

    def __mul__(self, other: "Poly3") -> "Poly3":
        acc = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                acc[e] = acc.get(e, 0) + ca * cb
        return Poly3(acc)

    def __add__(self, other: "Poly3") -> "Poly3":
        acc = dict(self.coeffs)
        for e, c in other.coeffs.items():
            acc[e] = acc.get(e, 0) + c
        return Poly3(acc)

    def rotated(self, omega) -> "Poly3":
        """``f(omega s1, omega^2 s2, omega^3 p)`` as a new polynomial."""
        return Poly3({(i, j, k): c * omega ** (i + 2 * j + 3 * k) for (i, j, k), c in self.coeffs.items()})

    def to_json(self):
        return [{"e": list(e), "c": [c.real, c.imag]} for e, c in sorted(self.coeffs.items())]

    @classmethod
    def from_json(cls, terms) -> "Poly3":
        coeffs = {}
        try:
            for t in terms:
                e = tuple(t["e"])
                re, im = t["c"]
                coeffs[e] = coeffs.get(e, 0) + complex(float(re), float(im))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed polynomial term list: {exc}") from exc
        return cls(coeffs)

    def __repr__(self):
        return f"Poly3({self.coeffs!r})"


def _powers(X, kmax):
    out = [np.eye(X.shape[0], dtype=complex)]
    for _ in range(kmax):
        out.append(out[-1] @ X)
    return out


def eval_poly(f: Poly3, T: OperatorTriple) -> np.ndarray:
    """``sum c_{ijk} S1^i S2^j P^k`` with cached powers of each operator."""
    mi, mj, mk = f.max_exponents()
    pw1, pw2, pw3 = _powers(T.S1, mi), _powers(T.S2, mj), _powers(T.P, mk)
    out = np.zeros((T.n, T.n), dtype=complex)
    for (i, j, k), c in f.coeffs.items():
        out += c * (pw1[i] @ pw2[j] @ pw3[k])
    return out


@lru_cache(maxsize=8)
def _torus_image(grid_per_dim):
    # symmetric in (z1, z2, z3), so index triples i <= j <= k suffice
    z = SUP_GRID_RADIUS * np.exp(2j * np.pi * np.arange(grid_per_dim) / grid_per_dim)
    i, j, k = np.array(
        [
            (a, b, c)
            for a in range(grid_per_dim)
            for b in range(a, grid_per_dim)
            for c in range(b, grid_per_dim)
        ]
    ).T
    z1, z2, z3 = z[i], z[j], z[k]
    s1 = z1 + z2 + z3
    s2 = z1 * z2 + z2 * z3 + z3 * z1
    p = z1 * z2 * z3
    for a in (s1, s2, p):
        a.setflags(write=False)
    return s1, s2, p


def sup_norm_gamma3(f: Poly3, grid_per_dim: int = DEFAULT_SUP_GRID) -> float:
    """Lower estimate of ``sup |f|`` over the closed symmetrized tridisc.

    By the maximum principle the supremum is attained on the image of the
    torus, so ``|f|`` is maximised over the symmetrization of a uniform
    ``grid_per_dim^3`` torus grid, scaled by ``SUP_GRID_RADIUS`` to stay
    inside the domain. Refining the grid by doubling never decreases the
    estimate.
    """
    if grid_per_dim < 8:
        raise InputError("grid_per_dim must be at least 8")
    if not f.coeffs:
        return 0.0
    s1, s2, p = _torus_image(int(grid_per_dim))
    mi, mj, mk = f.max_exponents()
    pw1 = [np.ones_like(s1)]
    pw2 = [np.ones_like(s2)]
    pw3 = [np.ones_like(p)]
    for _ in range(mi):
        pw1.append(pw1[-1] * s1)
    for _ in range(mj):
        pw2.append(pw2[-1] * s2)
    for _ in range(mk):
        pw3.append(pw3[-1] * p)
    vals = np.zeros_like(s1)
    for (i, j, k), c in f.coeffs.items():
        vals = vals + c * (pw1[i] * pw2[j] * pw3[k])
    return float(np.max(np.abs(vals)))


def von_neumann_ratio(f: Poly3, T: OperatorTriple, grid_per_dim=DEFAULT_SUP_GRID):
    """``(||f(T)||, sup estimate)`` for one polynomial."""
    return op_norm(eval_poly(f, T)), sup_norm_gamma3(f, grid_per_dim)
