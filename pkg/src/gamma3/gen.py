"""Reproducible generators of test triples with stored ground truth.

Normal generators place symmetrized points on a diagonal and conjugate by a
random unitary, so membership follows from the spectral theorem. The
``polynomial`` cnu generator symmetrizes monomials of a single random
contraction, which is covered by von Neumann's inequality. The fibered
generator is different: it is an unproven candidate and is tagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import InputError, adjoint, as_matrix, op_norm, random_unitary
from .opcore import OperatorTriple
from .points import PointPair, in_gamma2, sym3

KINDS = ("unitary", "normal", "cnu", "mixed", "scalar", "candidate_fibered")


@dataclass
class GenSpec:
    kind: str
    dims: tuple
    seed: int
    ground_truth: dict = field(default_factory=dict)
    candidate: bool = False

    def to_dict(self):
        return {
            "kind": self.kind,
            "dims": list(self.dims),
            "seed": self.seed,
            "candidate": self.candidate,
            "ground_truth": self.ground_truth,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["kind"], tuple(d["dims"]), int(d["seed"]), dict(d.get("ground_truth", {})),
                       bool(d.get("candidate", False)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed GenSpec: {exc}") from exc


def _cjson(z):
    return [float(np.real(z)), float(np.imag(z))]


def _points_json(points):
    return [[_cjson(c) for c in t] for t in points]


def _rng(seed):
    return np.random.default_rng(seed)


def _disk(rng, size, radius):
    # uniform on the closed disk of the given radius
    r = radius * np.sqrt(rng.uniform(size=size))
    return r * np.exp(1j * rng.uniform(0, 2 * np.pi, size=size))


def _torus(rng, size):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, size=size))


def _diagonal_triple(points, W):
    s1 = np.array([t.s1 for t in points])
    s2 = np.array([t.s2 for t in points])
    p = np.array([t.p for t in points])
    Wh = adjoint(W)
    return OperatorTriple(W @ np.diag(s1) @ Wh, W @ np.diag(s2) @ Wh, W @ np.diag(p) @ Wh, check=False)


def _from_z(z, W, kind, dims, seed, extra=None):
    points = [sym3(*row) for row in z]
    T = _diagonal_triple(points, W)
    truth = {"points": _points_json(points), "z": [[_cjson(c) for c in row] for row in z]}
    truth.update(extra or {})
    return T, GenSpec(kind, tuple(dims), seed, truth)


def gen_gamma3_unitary(n: int, seed: int):
    """Normal triple with joint spectrum drawn from the symmetrized torus."""
    if n < 1:
        raise InputError("n must be at least 1")
    rng = _rng(seed)
    z = _torus(rng, (n, 3))
    W = random_unitary(n, rng)
    return _from_z(z, W, "unitary", (n,), seed, {"dim_h1": n})


def gen_normal_gamma3(n: int, seed: int, radius: float = 1.0, points=None):
    """Normal triple with joint spectrum in the image of the closed tridisc of ``radius``.

    ``points`` (an ``n x 3`` array of disk coordinates) overrides the random
    draw. With ``radius < 1`` every joint eigenvalue has ``|p| <= radius^3``
    and the triple is completely non-unitary.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    if not 0 <= radius <= 1:
        raise InputError("radius must lie in [0, 1]")
    rng = _rng(seed)
    if points is None:
        z = _disk(rng, (n, 3), radius)
    else:
        z = np.asarray(points, dtype=complex).reshape(n, 3)
        if np.any(np.abs(z) > 1 + 1e-12):
            raise InputError("points must lie in the closed unit disk")
    W = random_unitary(n, rng)
    dim_h1 = int(np.sum(np.all(np.isclose(np.abs(z), 1.0, atol=1e-12), axis=1)))
    return _from_z(z, W, "normal", (n,), seed, {"dim_h1": dim_h1, "radius": radius})


def gen_cnu_polynomial(n: int, seed: int, norm: float = 0.9):
    """Non-normal cnu triple ``sym3(u1 T^k1, u2 T^k2, u3 T^k3)`` for a random contraction ``T``.

    Each coordinate is a polynomial in one contraction mapping the disk into
    itself, so any polynomial in the triple is a one-variable polynomial in
    ``T`` bounded by its sup over the tridisc image.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    if not 0 < norm < 1:
        raise InputError("norm must lie in (0, 1)")
    rng = _rng(seed)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    T = norm * G / op_norm(G)
    u = _torus(rng, 3)
    k = rng.integers(1, 3, size=3)
    Z = [u[i] * np.linalg.matrix_power(T, int(k[i])) for i in range(3)]
    S1 = Z[0] + Z[1] + Z[2]
    S2 = Z[0] @ Z[1] + Z[1] @ Z[2] + Z[2] @ Z[0]
    P = Z[0] @ Z[1] @ Z[2]
    spec = GenSpec("cnu", (n,), seed, {"dim_h1": 0, "units": [_cjson(x) for x in u],
                                       "exponents": [int(x) for x in k]})
    return OperatorTriple(S1, S2, P, check=False), spec


def gen_mixed(n_unitary: int, n_cnu: int, seed: int, cnu: str = "normal"):
    """Direct sum of a Gamma_3-unitary and a cnu triple, mixed by one random unitary.

    ``cnu`` selects the second summand: ``"normal"`` (radius 0.9 normal
    triple) or ``"polynomial"`` (:func:`gen_cnu_polynomial`).
    """
    if n_unitary < 0 or n_cnu < 0 or n_unitary + n_cnu < 1:
        raise InputError("need n_unitary + n_cnu >= 1 with both non-negative")
    if cnu not in ("normal", "polynomial"):
        raise InputError(f"unknown cnu summand {cnu!r}")
    ss = np.random.SeedSequence(seed)
    s_u, s_c, s_w = (int(c.generate_state(1)[0]) for c in ss.spawn(3))
    n = n_unitary + n_cnu
    blocks, points = [], []
    if n_unitary:
        U, gu = gen_gamma3_unitary(n_unitary, s_u)
        blocks.append(U)
        points += gu.ground_truth["points"]
    if n_cnu:
        if cnu == "normal":
            C, gc = gen_normal_gamma3(n_cnu, s_c, radius=0.9)
            points += gc.ground_truth["points"]
        else:
            C, gc = gen_cnu_polynomial(n_cnu, s_c)
        blocks.append(C)

    def dsum(name):
        out = np.zeros((n, n), dtype=complex)
        i = 0
        for B in blocks:
            X = getattr(B, name)
            m = X.shape[0]
            out[i:i + m, i:i + m] = X
            i += m
        return out

    W = random_unitary(n, _rng(s_w))
    Wh = adjoint(W)
    T = OperatorTriple(*(W @ dsum(name) @ Wh for name in ("S1", "S2", "P")), check=False)
    truth = {"dim_h1": n_unitary, "cnu": cnu}
    if cnu == "normal":
        truth["points"] = points
    return T, GenSpec("mixed", (n_unitary, n_cnu), seed, truth)


def gen_scalar(s1, s2, p, n: int = 1):
    T = OperatorTriple.scalar(s1, s2, p, n, check=False)
    truth = {"points": [[_cjson(s1), _cjson(s2), _cjson(p)]] * n}
    return T, GenSpec("scalar", (n,), 0, truth)


def gen_candidate_fibered(c: PointPair, T_cnu=None, seed: int = 0, n: int = 3):
    """``(c1 I + conj(c2) T, c2 I + conj(c1) T, T)`` for a pair ``c`` in the bidisc.

    Operator version of the scalar fibering. Nothing guarantees the output
    is a Gamma_3-contraction, so the GenSpec is tagged ``candidate`` and the
    triple should be run through the battery before use. Without ``T_cnu`` a
    random contraction of norm 0.9 and size ``n`` is drawn from ``seed``.
    """
    c = PointPair(*c)
    if not in_gamma2(c).inside:
        raise InputError(f"{c} is not in the closed symmetrized bidisc")
    if T_cnu is None:
        rng = _rng(seed)
        G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        T_cnu = 0.9 * G / op_norm(G)
    T_cnu = as_matrix(T_cnu)
    if op_norm(T_cnu) > 1 + 1e-12:
        raise InputError("T_cnu must be a contraction")
    n = T_cnu.shape[0]
    eye = np.eye(n)
    S1 = c.c1 * eye + c.c2.conjugate() * T_cnu
    S2 = c.c2 * eye + c.c1.conjugate() * T_cnu
    spec = GenSpec("candidate_fibered", (n,), seed, {"c": [_cjson(c.c1), _cjson(c.c2)]}, candidate=True)
    return OperatorTriple(S1, S2, T_cnu, check=False), spec


def generate(kind: str, dims, seed: int, **kw):
    """Dispatch on ``kind`` (see :data:`KINDS`)."""
    dims = tuple(int(d) for d in dims)
    if kind == "unitary":
        return gen_gamma3_unitary(dims[0], seed)
    if kind == "normal":
        return gen_normal_gamma3(dims[0], seed, radius=kw.get("radius", 1.0))
    if kind == "cnu":
        if kw.get("cnu", "normal") == "polynomial":
            return gen_cnu_polynomial(dims[0], seed)
        T, spec = gen_normal_gamma3(dims[0], seed, radius=kw.get("radius", 0.9))
        spec.kind = "cnu"
        return T, spec
    if kind == "mixed":
        if len(dims) != 2:
            raise InputError("mixed needs two dims: n_unitary,n_cnu")
        return gen_mixed(dims[0], dims[1], seed, cnu=kw.get("cnu", "normal"))
    if kind == "scalar":
        s1, s2, p = kw.get("point", (0, 0, 0))
        return gen_scalar(s1, s2, p, dims[0] if dims else 1)
    if kind == "candidate_fibered":
        return gen_candidate_fibered(kw.get("c", (0, 0)), seed=seed, n=dims[0] if dims else 3)
    raise InputError(f"unknown kind {kind!r}; expected one of {KINDS}")
