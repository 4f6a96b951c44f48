"""Canonical decomposition of a triple along the unitary part of ``P``.

``H1`` is the largest subspace reducing ``P`` on which ``P`` is unitary and
``H2`` its orthogonal complement. For a genuine Gamma_3-contraction both
subspaces also reduce ``S1`` and ``S2``; the off-diagonal blocks of ``S1`` and
``S2`` in the ``(H1, H2)`` frame are therefore the natural violation
detector, alongside the block identities that force them to vanish.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    DEFAULT_TOL,
    InputError,
    SubspaceBasis,
    Tolerances,
    adjoint,
    as_matrix,
    intersect,
    kernel_basis,
    null_space,
    op_norm,
)
from .opcore import OperatorTriple

VIOLATION_SCALE = 1e-6

BLOCK_NAMES = (
    "S111", "S112", "S121", "S122",
    "S211", "S212", "S221", "S222",
    "P1", "P12", "P21", "P2",
)


def unitary_part(P, tol: Tolerances = DEFAULT_TOL) -> SubspaceBasis:
    """Maximal reducing subspace of the contraction ``P`` on which it is unitary.

    Start from ``K0 = ker(I - P*P) ∩ ker(I - PP*)`` and shrink
    ``K_{j+1} = {h in K_j : Ph in K_j, P*h in K_j}`` until the dimension
    stops changing, which takes at most ``n`` rounds.
    """
    P = as_matrix(P)
    n = P.shape[0]
    nrm = op_norm(P)
    if nrm > 1 + 10 * tol.eq_tol:
        raise InputError(f"P is not a contraction (||P|| = {nrm:.12g})")
    if n == 0:
        return SubspaceBasis.zero(0)
    eye = np.eye(n)
    Ph = adjoint(P)
    K = intersect(kernel_basis(eye - Ph @ P, tol), kernel_basis(eye - P @ Ph, tol), tol)
    cutoff = tol.rank_tol * max(1.0, nrm)
    for _ in range(n + 1):
        if K.k == 0:
            break
        F = K.frame
        comp = eye - K.projector()
        stacked = np.vstack([comp @ P @ F, comp @ Ph @ F])
        coeffs = null_space(stacked, cutoff)
        if coeffs.shape[1] == K.k:
            break
        K = SubspaceBasis(F @ coeffs)
    return K


@dataclass
class CanonicalSplit:
    """The triple written in the frame ``[H1 | H2]``.

    ``blocks`` holds every block of ``S1``, ``S2`` and ``P``, off-diagonal
    ones included, so that the identities relating them can be audited.
    """

    H1: SubspaceBasis
    H2: SubspaceBasis
    blocks: dict
    off_diag_residual: float
    violation_threshold: float = float("inf")
    unitary_part_ok: bool | None = None
    cnu_part_ok: bool | None = None
    notes: list = field(default_factory=list)

    @property
    def dim_h1(self) -> int:
        return self.H1.k

    @property
    def dim_h2(self) -> int:
        return self.H2.k

    @property
    def theorem_consistent(self) -> bool:
        return (
            self.off_diag_residual <= self.violation_threshold
            and self.unitary_part_ok is not False
            and self.cnu_part_ok is not False
        )

    def unitary_triple(self) -> OperatorTriple:
        b = self.blocks
        return OperatorTriple(b["S111"], b["S211"], b["P1"], check=False)

    def cnu_triple(self) -> OperatorTriple:
        b = self.blocks
        return OperatorTriple(b["S122"], b["S222"], b["P2"], check=False)


def _blocks(X, F1, F2, prefix):
    names = {"S1": ("S111", "S112", "S121", "S122"),
             "S2": ("S211", "S212", "S221", "S222"),
             "P": ("P1", "P12", "P21", "P2")}[prefix]
    out = {}
    for name, (A, B) in zip(names, ((F1, F1), (F1, F2), (F2, F1), (F2, F2))):
        out[name] = adjoint(A) @ X @ B
    return out


def _norm(X):
    return op_norm(X) if X.size else 0.0


def verify_proof_identities(split: CanonicalSplit) -> dict:
    """Residual norms of the block identities behind the decomposition.

    Keys name the identity; every value is ``||lhs - rhs||`` (0 for empty
    blocks). Reads the off-diagonal blocks as extracted, before any zeroing.
    """
    b = split.blocks
    S111, S112, S121, S122 = b["S111"], b["S112"], b["S121"], b["S122"]
    S211, S212, S221, S222 = b["S211"], b["S212"], b["S221"], b["S222"]
    P1, P2 = b["P1"], b["P2"]
    h = adjoint
    r = {
        # unitary corner: S111 = S211* P1 and S211 = S111* P1
        "S111 - S211* P1": _norm(S111 - h(S211) @ P1),
        "S211 - S111* P1": _norm(S211 - h(S111) @ P1),
        # cross relations
        "S112 - S221* P2": _norm(S112 - h(S221) @ P2),
        "S121* - P1* S212": _norm(h(S121) - h(P1) @ S212),
        "S212 - S121* P2": _norm(S212 - h(S121) @ P2),
        "S221* - P1* S112": _norm(h(S221) - h(P1) @ S112),
        "S212* P1 - P2 S212*": _norm(h(S212) @ P1 - P2 @ h(S212)),
        # commutation with P, blockwise
        "S111 P1 - P1 S111": _norm(S111 @ P1 - P1 @ S111),
        "S112 P2 - P1 S112": _norm(S112 @ P2 - P1 @ S112),
        "S121 P1 - P2 S121": _norm(S121 @ P1 - P2 @ S121),
        "S122 P2 - P2 S122": _norm(S122 @ P2 - P2 @ S122),
        "S211 P1 - P1 S211": _norm(S211 @ P1 - P1 @ S211),
        "S212 P2 - P1 S212": _norm(S212 @ P2 - P1 @ S212),
        "S221 P1 - P2 S221": _norm(S221 @ P1 - P2 @ S221),
        "S222 P2 - P2 S222": _norm(S222 @ P2 - P2 @ S222),
        # P is block diagonal by construction of H1
        "P12": _norm(b["P12"]),
        "P21": _norm(b["P21"]),
        # the conclusion: off-diagonal blocks of S1, S2 vanish
        "S112": _norm(S112),
        "S121": _norm(S121),
        "S212": _norm(S212),
        "S221": _norm(S221),
    }
    return r


def split_triple(T: OperatorTriple, tol: Tolerances = DEFAULT_TOL, check_parts=True):
    """Split ``T`` along ``H1 = unitary_part(P)`` and ``H2 = H1^perp``.

    Returns ``(split, residuals)``. A large off-diagonal residual does not
    raise: it is recorded and makes ``split.theorem_consistent`` false,
    signalling that ``T`` was not a Gamma_3-contraction. With
    ``check_parts`` the corner triples are also certified (Gamma_3-unitary
    by both routes, resp. completely non-unitary).
    """
    H1 = unitary_part(T.P, tol)
    H2 = H1.complement()
    F1, F2 = H1.frame, H2.frame
    blocks = {}
    for X, prefix in zip(T.matrices(), ("S1", "S2", "P")):
        blocks.update(_blocks(X, F1, F2, prefix))
    off = max(_norm(blocks[k]) for k in ("S112", "S121", "S212", "S221"))
    threshold = VIOLATION_SCALE * (1 + op_norm(T.S1) + op_norm(T.S2))
    split = CanonicalSplit(H1, H2, blocks, off, threshold)
    if off > threshold:
        split.notes.append(
            f"off-diagonal blocks do not vanish ({off:.3e} > {threshold:.3e}); "
            "input is not a Gamma_3-contraction"
        )
    if check_parts:
        from .certify import is_cnu, is_gamma3_unitary

        U = split.unitary_triple()
        reports = [is_gamma3_unitary(U, route, tol) for route in (1, 3)]
        split.unitary_part_ok = all(r.verdict == "pass" for r in reports)
        split.cnu_part_ok = is_cnu(split.cnu_triple(), tol)
        if not split.unitary_part_ok:
            split.notes.append("restriction to H1 failed the Gamma_3-unitary check")
        if not split.cnu_part_ok:
            split.notes.append("restriction to H2 is not completely non-unitary")
    return split, verify_proof_identities(split)
