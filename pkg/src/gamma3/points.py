"""Scalar geometry of the symmetrized bidisc and tridisc.

A triple ``(s1, s2, p)`` lies in the closed symmetrized tridisc exactly when
every root of ``z^3 - s1 z^2 + s2 z - p`` has modulus at most one, and on
its distinguished boundary when every root is unimodular. The pair analogue
uses ``z^2 - c1 z + c2``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .numerics import InputError

MEMBERSHIP_TOL = 1e-9
FIBERED_P_LIMIT = 1.0 - 1e-6

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class PointTriple:
    s1: complex
    s2: complex
    p: complex

    def __post_init__(self):
        for name in ("s1", "s2", "p"):
            v = complex(getattr(self, name))
            if not cmath.isfinite(v):
                raise InputError(f"{name} is not finite")
            object.__setattr__(self, name, v)

    def as_tuple(self):
        return (self.s1, self.s2, self.p)

    def __iter__(self):
        return iter(self.as_tuple())


@dataclass(frozen=True)
class PointPair:
    c1: complex
    c2: complex

    def __post_init__(self):
        for name in ("c1", "c2"):
            v = complex(getattr(self, name))
            if not cmath.isfinite(v):
                raise InputError(f"{name} is not finite")
            object.__setattr__(self, name, v)

    # the same pair read as (sum, product) coordinates
    @property
    def s(self):
        return self.c1

    @property
    def p(self):
        return self.c2

    def as_tuple(self):
        return (self.c1, self.c2)

    def __iter__(self):
        return iter(self.as_tuple())


@dataclass(frozen=True)
class MembershipVerdict:
    inside: bool
    on_distinguished_boundary: bool
    max_root_modulus: float
    witnesses: list = field(default_factory=list)

    def to_dict(self):
        return {
            "inside": self.inside,
            "on_distinguished_boundary": self.on_distinguished_boundary,
            "max_root_modulus": self.max_root_modulus,
            "roots": [[r.real, r.imag] for r in self.witnesses],
        }


def sym3(z1, z2, z3) -> PointTriple:
    return PointTriple(z1 + z2 + z3, z1 * z2 + z2 * z3 + z3 * z1, z1 * z2 * z3)


def sym2(z1, z2) -> PointPair:
    return PointPair(z1 + z2, z1 * z2)


def _horner(coeffs, z):
    acc = 0j
    for c in coeffs:
        acc = acc * complex(z) + complex(c)
    return acc


def _derivative(coeffs):
    d = len(coeffs) - 1
    return [c * (d - i) for i, c in enumerate(coeffs[:-1])]


def monic_roots(coeffs) -> list:
    """Roots of the monic polynomial ``z^d + coeffs[0] z^(d-1) + ... + coeffs[-1]``.

    Roots are eigenvalues of the companion matrix. Eigenvalues of a multiple
    root scatter by roughly ``(eps * scale)^(1/m)``; clusters of that size
    are replaced by their centroid, which is accurate to ``O(eps)``, and
    then Newton-polished on the ``(m-1)``-th derivative.
    """
    coeffs = [complex(c) for c in coeffs]
    d = len(coeffs)
    if d == 0:
        return []
    C = np.zeros((d, d), dtype=complex)
    C[0, :] = -np.asarray(coeffs)
    C[1:, :-1] += np.eye(d - 1)
    roots = list(np.linalg.eigvals(C))

    full = [1 + 0j] + coeffs
    kappa = sum(abs(c) for c in full)
    # largest clusters first so a triple root is not split into a pair
    for m in range(d, 1, -1):
        radius = 10.0 * (kappa * _EPS) ** (1.0 / m)
        roots = _merge_clusters(roots, m, radius, full)
    return roots


def _merge_clusters(roots, m, radius, poly):
    remaining = list(range(len(roots)))
    out = []
    merged = True
    while merged:
        merged = False
        for combo in combinations(remaining, m):
            pts = [roots[i] for i in combo]
            diam = max(abs(a - b) for a, b in combinations(pts, 2))
            if diam <= radius * max(1.0, max(abs(x) for x in pts)):
                c = complex(sum(pts) / m)
                deriv = poly
                for _ in range(m - 1):
                    deriv = _derivative(deriv)
                ddev = _derivative(deriv)
                for _ in range(2):
                    try:
                        step = _horner(deriv, c) / _horner(ddev, c)
                    except (ZeroDivisionError, OverflowError):
                        break
                    if not cmath.isfinite(step) or abs(step) > radius:
                        break
                    c -= step
                out.extend([c] * m)
                remaining = [i for i in remaining if i not in combo]
                merged = True
                break
    return out + [roots[i] for i in remaining]


def _verdict_from_roots(roots, tol) -> MembershipVerdict:
    roots = [complex(r) for r in roots]
    moduli = [abs(r) for r in roots]
    mx = max(moduli) if moduli else 0.0
    inside = mx <= 1.0 + tol
    boundary = bool(moduli) and all(1.0 - tol <= r <= 1.0 + tol for r in moduli)
    return MembershipVerdict(inside, boundary and inside, mx, roots)


def in_gamma2(c: PointPair, tol: float = MEMBERSHIP_TOL) -> MembershipVerdict:
    c = PointPair(*c)
    return _verdict_from_roots(monic_roots([-c.c1, c.c2]), tol)


def in_gamma3_roots(t: PointTriple, tol: float = MEMBERSHIP_TOL) -> MembershipVerdict:
    t = PointTriple(*t)
    return _verdict_from_roots(monic_roots([-t.s1, t.s2, -t.p]), tol)


def fiber_witness(t: PointTriple) -> PointPair:
    """Unique ``(c1, c2)`` with ``s1 = c1 + conj(c2) p`` and ``s2 = c2 + conj(c1) p``.

    Requires ``|p| < 1``.
    """
    t = PointTriple(*t)
    denom = 1.0 - abs(t.p) ** 2
    if denom <= 0:
        raise InputError("fiber witness requires |p| < 1")
    c1 = (t.s1 - t.s2.conjugate() * t.p) / denom
    c2 = (t.s2 - t.s1.conjugate() * t.p) / denom
    return PointPair(c1, c2)


def in_gamma3_fibered(t: PointTriple, tol: float = MEMBERSHIP_TOL):
    """Membership through the fibering over the symmetrized bidisc.

    Returns ``(verdict, c)``. For ``|p| <= 1 - 1e-6`` the witness pair ``c``
    is computed in closed form and the verdict is that of ``c`` in the
    bidisc (``max_root_modulus`` then refers to the roots of
    ``z^2 - c1 z + c2``). Closer to ``|p| = 1`` the closed form degenerates
    and the root test is used instead, with ``c`` absent. ``|p| > 1`` is
    rejected without further work.
    """
    t = PointTriple(*t)
    ap = abs(t.p)
    if ap > 1.0 + tol:
        return MembershipVerdict(False, False, float("nan"), []), None
    if ap > FIBERED_P_LIMIT:
        return in_gamma3_roots(t, tol), None
    c = fiber_witness(t)
    v = in_gamma2(c, tol)
    # |p| < 1 here, so the point cannot sit on the distinguished boundary
    return MembershipVerdict(v.inside, False, v.max_root_modulus, v.witnesses), c


def rotate_point(t: PointTriple, omega) -> PointTriple:
    omega = complex(omega)
    if abs(abs(omega) - 1.0) > 1e-12:
        raise InputError(f"rotation factor must be unimodular, |omega| = {abs(omega)!r}")
    t = PointTriple(*t)
    return PointTriple(omega * t.s1, omega**2 * t.s2, omega**3 * t.p)


def in_b_gamma3_scalar(t: PointTriple, tol: float = MEMBERSHIP_TOL) -> bool:
    """Distinguished-boundary test without cubic roots.

    ``|p| = 1``, ``s1 = conj(s2) p`` and ``(2 s1 / 3, s2 / 3)`` in the
    closed symmetrized bidisc.
    """
    t = PointTriple(*t)
    if not (1.0 - tol <= abs(t.p) <= 1.0 + tol):
        return False
    if abs(t.s1 - t.s2.conjugate() * t.p) > tol * (1.0 + abs(t.s2)):
        return False
    return in_gamma2(PointPair(2.0 * t.s1 / 3.0, t.s2 / 3.0), tol).inside
