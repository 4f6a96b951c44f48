"""Certification batteries for triples of commuting matrices.

Everything here probes *necessary* conditions. A passing
:func:`battery_gamma3_contraction` report means no violation was found, not
that the triple has been proven to admit the symmetrized tridisc as a
spectral set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .decomp import unitary_part
from .numerics import (
    DEFAULT_TOL,
    ContractViolation,
    InputError,
    NumericalFailure,
    Tolerances,
    adjoint,
    as_matrix,
    op_norm,
    simultaneous_triangularize,
)
from .opcore import (
    DEFAULT_ANGULAR_STEPS,
    DEFAULT_RADIAL_STEPS,
    DEFAULT_SUP_GRID,
    OperatorTriple,
    Poly3,
    eval_poly,
    pencil_scan,
    scale_rotate_triple,
    sup_norm_gamma3,
)
from .points import MEMBERSHIP_TOL, PointTriple, in_gamma2, in_gamma3_roots

NECESSARY_ONLY = (
    "necessary conditions only: a pass means no violation was found, "
    "not that the triple is proven to be a Gamma_3-contraction"
)

ALL_CHECKS = ("commutation", "norms", "spectrum", "pencil", "von_neumann")


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


@dataclass
class Check:
    name: str
    value: float | None
    threshold: float | None
    passed: bool
    skipped: bool = False

    def to_dict(self):
        return {
            "name": self.name,
            "value": _finite_or_none(self.value),
            "threshold": _finite_or_none(self.threshold),
            "pass": None if self.skipped else bool(self.passed),
        }


@dataclass
class CertificationReport:
    checks: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    seed: int | None = None
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if any(not c.passed and not c.skipped for c in self.checks):
            return "fail"
        if any(c.skipped for c in self.checks):
            return "indeterminate"
        return "pass"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def add(self, name, value, threshold, passed, skipped=False):
        self.checks.append(Check(name, value, threshold, bool(passed), skipped))

    def check(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self):
        return [c.name for c in self.checks if not c.passed and not c.skipped]

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "checks": [c.to_dict() for c in self.checks],
            "witnesses": self.witnesses,
            "seed": self.seed,
            "notes": self.notes,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), allow_nan=False, **kw)


@dataclass(frozen=True)
class BatteryConfig:
    tol: Tolerances = DEFAULT_TOL
    membership_tol: float = MEMBERSHIP_TOL
    radial_steps: int = DEFAULT_RADIAL_STEPS
    angular_steps: int = DEFAULT_ANGULAR_STEPS
    n_polys: int = 20
    degree: int = 3
    slack: float = 0.01
    grid_per_dim: int = DEFAULT_SUP_GRID
    seed: int = 0
    skip: frozenset = frozenset()


def joint_spectrum(T: OperatorTriple, tol: Tolerances = DEFAULT_TOL) -> list:
    """Joint eigenvalues of the triple, one PointTriple per dimension (with multiplicity)."""
    if T.n == 0:
        return []
    _, tri = simultaneous_triangularize(T.matrices(), tol)
    d1, d2, d3 = (np.diag(X) for X in tri)
    return [PointTriple(a, b, c) for a, b, c in zip(d1, d2, d3)]


def _point_json(t: PointTriple):
    return [[z.real, z.imag] for z in t.as_tuple()]


def _spectrum_or_reason(T, tol):
    try:
        return joint_spectrum(T, tol), None
    except ContractViolation as exc:
        return None, f"joint spectrum undefined: {exc}"
    except NumericalFailure as exc:
        return None, f"triangularization failed: {exc}"


def _run_checks(T: OperatorTriple, cfg: BatteryConfig, names) -> CertificationReport:
    tol = cfg.tol
    report = CertificationReport(seed=cfg.seed)

    def skipped(name):
        return name in cfg.skip

    if "commutation" in names:
        if skipped("commutation"):
            report.add("commutation", None, tol.eq_tol, False, skipped=True)
        else:
            d = max(T.commutation_defects)
            report.add("commutation", d, tol.eq_tol, d <= tol.eq_tol)

    if "norms" in names:
        for name, X, bound in (("norm_S1", T.S1, 3.0), ("norm_S2", T.S2, 3.0), ("norm_P", T.P, 1.0)):
            if skipped("norms"):
                report.add(name, None, bound + tol.eq_tol, False, skipped=True)
            else:
                v = op_norm(X)
                report.add(name, v, bound + tol.eq_tol, v <= bound + tol.eq_tol)

    if "spectrum" in names:
        threshold = 1.0 + cfg.membership_tol
        if skipped("spectrum"):
            report.add("joint_spectrum_in_gamma3", None, threshold, False, skipped=True)
        else:
            spec, reason = _spectrum_or_reason(T, tol)
            if spec is None:
                report.add("joint_spectrum_in_gamma3", None, threshold, False)
                report.witnesses["joint_spectrum"] = reason
            else:
                worst, worst_pt = 0.0, None
                for t in spec:
                    v = in_gamma3_roots(t, cfg.membership_tol)
                    if v.max_root_modulus >= worst:
                        worst, worst_pt = v.max_root_modulus, t
                ok = worst <= threshold
                report.add("joint_spectrum_in_gamma3", worst, threshold, ok)
                if not ok:
                    report.witnesses["joint_eigenvalue"] = _point_json(worst_pt)

    if "pencil" in names:
        if skipped("pencil"):
            report.add("pencil_min_eig", None, -tol.psd_tol, False, skipped=True)
        else:
            scan = pencil_scan(T, cfg.radial_steps, cfg.angular_steps)
            ok = scan.global_min >= -tol.psd_tol
            report.add("pencil_min_eig", scan.global_min, -tol.psd_tol, ok)
            if not ok:
                report.witnesses["alpha"] = [scan.argmin.real, scan.argmin.imag]

    if "von_neumann" in names:
        if skipped("von_neumann"):
            report.add("von_neumann", None, tol.psd_tol, False, skipped=True)
        else:
            rng = np.random.default_rng(cfg.seed)
            worst, worst_f, worst_pair = -np.inf, None, None
            for _ in range(cfg.n_polys):
                f = Poly3.random(cfg.degree, rng)
                lhs = op_norm(eval_poly(f, T))
                sup = sup_norm_gamma3(f, cfg.grid_per_dim)
                excess = lhs - sup * (1.0 + cfg.slack)
                if excess > worst:
                    worst, worst_f, worst_pair = excess, f, (lhs, sup)
            ok = worst <= tol.psd_tol
            report.add("von_neumann", worst, tol.psd_tol, ok)
            if not ok:
                report.witnesses["polynomial"] = worst_f.to_json()
                report.witnesses["norm_f_T"] = worst_pair[0]
                report.witnesses["sup_norm_estimate"] = worst_pair[1]
    return report


def battery_gamma3_contraction(T: OperatorTriple, config: BatteryConfig | None = None) -> CertificationReport:
    """Run every necessary condition for being a Gamma_3-contraction.

    In order: commutation, the norm bounds ``||S_i|| <= 3`` and
    ``||P|| <= 1``, joint spectrum inside the closed tridisc image, pencil
    positivity over the scaled-rotation grid, and sampled polynomial
    inequalities ``||f(T)|| <= sup |f| (1 + slack) + psd_tol``.
    """
    cfg = config or BatteryConfig()
    report = _run_checks(T, cfg, ALL_CHECKS)
    report.notes.append(NECESSARY_ONLY)
    return report


def battery_pencil(T: OperatorTriple, config: BatteryConfig | None = None) -> CertificationReport:
    cfg = config or BatteryConfig()
    report = _run_checks(T, cfg, ("commutation", "pencil"))
    report.notes.append(NECESSARY_ONLY)
    return report


def battery_von_neumann(T: OperatorTriple, config: BatteryConfig | None = None) -> CertificationReport:
    cfg = config or BatteryConfig()
    report = _run_checks(T, cfg, ("commutation", "von_neumann"))
    report.notes.append(NECESSARY_ONLY)
    return report


def _normality_defect(X):
    return op_norm(adjoint(X) @ X - X @ adjoint(X))


def is_gamma3_unitary(T: OperatorTriple, route: int = 1, tol: Tolerances = DEFAULT_TOL,
                      membership_tol: float = MEMBERSHIP_TOL) -> CertificationReport:
    """Gamma_3-unitary test by one of two equivalent routes.

    Route 1: ``S1, S2, P`` normal and every joint eigenvalue on the
    distinguished boundary.

    Route 3: ``P`` unitary, ``S1 = S2* P``, and every joint eigenvalue pair of
    ``(2 S1 / 3, S2 / 3)`` in the closed symmetrized bidisc. The bidisc
    condition is checked on the joint spectrum, which is adequate because
    the other two conditions already force normality.
    """
    if route not in (1, 3):
        raise InputError(f"route must be 1 or 3, got {route!r}")
    report = CertificationReport()
    report.witnesses["route"] = route
    spec, reason = _spectrum_or_reason(T, tol)

    if route == 1:
        for name, X in (("normal_S1", T.S1), ("normal_S2", T.S2), ("normal_P", T.P)):
            d = _normality_defect(X)
            thr = tol.eq_tol * (1 + op_norm(X)) ** 2
            report.add(name, d, thr, d <= thr)
        if spec is None:
            report.add("joint_spectrum_in_b_gamma3", None, membership_tol, False)
            report.witnesses["joint_spectrum"] = reason
        else:
            dev, bad = 0.0, None
            for t in spec:
                v = in_gamma3_roots(t, membership_tol)
                d = max((abs(abs(r) - 1.0) for r in v.witnesses), default=0.0)
                if not v.on_distinguished_boundary and bad is None:
                    bad = t
                dev = max(dev, d)
            report.add("joint_spectrum_in_b_gamma3", dev, membership_tol, bad is None)
            if bad is not None:
                report.witnesses["joint_eigenvalue"] = _point_json(bad)
        return report

    P = T.P
    eye = np.eye(T.n)
    u = max(op_norm(adjoint(P) @ P - eye), op_norm(P @ adjoint(P) - eye)) if T.n else 0.0
    report.add("P_unitary", u, tol.eq_tol, u <= tol.eq_tol)
    r = op_norm(T.S1 - adjoint(T.S2) @ P)
    thr = tol.eq_tol * (1 + op_norm(T.S2))
    report.add("S1 - S2* P", r, thr, r <= thr)
    if spec is None:
        report.add("gamma2_pairs", None, 1.0 + membership_tol, False)
        report.witnesses["joint_spectrum"] = reason
    else:
        worst, worst_pt = 0.0, None
        for t in spec:
            v = in_gamma2((2.0 * t.s1 / 3.0, t.s2 / 3.0), membership_tol)
            if v.max_root_modulus >= worst:
                worst, worst_pt = v.max_root_modulus, t
        ok = worst <= 1.0 + membership_tol
        report.add("gamma2_pairs", worst, 1.0 + membership_tol, ok)
        if not ok:
            report.witnesses["joint_eigenvalue"] = _point_json(worst_pt)
    return report


def _as_P(T):
    return T.P if isinstance(T, OperatorTriple) else as_matrix(T)


def is_cnu(T, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True when ``P`` (of a triple, or given directly) has no unitary part."""
    return unitary_part(_as_P(T), tol).k == 0


def is_pure_contraction(P, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Finite-dimensional purity: spectral radius at most ``1 - rank_tol``."""
    P = _as_P(P)
    nrm = op_norm(P)
    if nrm > 1 + 10 * tol.eq_tol:
        raise InputError(f"P is not a contraction (||P|| = {nrm:.12g})")
    if P.shape[0] == 0:
        return True
    return float(np.max(np.abs(np.linalg.eigvals(P)))) <= 1.0 - tol.rank_tol


def default_omega_grid(m=8):
    return [complex(np.exp(2j * np.pi * k / m)) for k in range(m)]


def rotate_triple_battery(T: OperatorTriple, omegas=None, config: BatteryConfig | None = None) -> CertificationReport:
    """Run the contraction battery along the orbit ``(w S1, w^2 S2, w^3 P)``.

    One check per ``w`` (passes when that rotated battery passes) plus an
    ``orbit_agreement`` check that all verdicts coincide.
    """
    cfg = config or BatteryConfig()
    omegas = default_omega_grid() if omegas is None else list(omegas)
    report = CertificationReport(seed=cfg.seed)
    verdicts = []
    for k, w in enumerate(omegas):
        sub = battery_gamma3_contraction(scale_rotate_triple(T, w), cfg)
        verdicts.append(sub.verdict)
        report.add(f"omega[{k}]", None, None, sub.verdict == "pass")
        if sub.verdict != "pass":
            report.witnesses.setdefault("failed_checks", {})[str(k)] = sub.failed()
    agree = len(set(verdicts)) <= 1
    report.add("orbit_agreement", None, None, agree)
    report.witnesses["omegas"] = [[w.real, w.imag] for w in omegas]
    report.witnesses["orbit_verdicts"] = verdicts
    report.witnesses["orbit_agrees"] = agree
    report.notes.append(NECESSARY_ONLY)
    return report
