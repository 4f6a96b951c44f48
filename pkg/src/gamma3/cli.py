"""Command-line driver over JSON files.

Exit codes: 0 pass / inside / theorem-consistent, 1 fail / outside /
violation detected, 2 input error. Complex numbers are ``[re, im]`` pairs;
matrices are ``{"rows", "cols", "data"}`` with row-major ``data``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .certify import (
    BatteryConfig,
    battery_gamma3_contraction,
    battery_pencil,
    battery_von_neumann,
    is_gamma3_unitary,
    joint_spectrum,
)
from .decomp import BLOCK_NAMES, split_triple
from .gen import KINDS, generate
from .numerics import DEFAULT_TOL, ContractViolation, InputError, Tolerances
from .opcore import OperatorTriple, Poly3, pencil_scan, sup_norm_gamma3
from .points import MEMBERSHIP_TOL, in_gamma3_fibered, in_gamma3_roots

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


# ---- schema ---------------------------------------------------------------

def matrix_to_json(A):
    A = np.asarray(A, dtype=complex)
    rows, cols = A.shape
    return {
        "rows": rows,
        "cols": cols,
        "data": [[float(z.real), float(z.imag)] for z in A.ravel()],
    }


def matrix_from_json(obj, square=True):
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
        if len(data) != rows * cols:
            raise InputError(f"data has {len(data)} entries, expected {rows * cols}")
        vals = [complex(float(re), float(im)) for re, im in data]
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix: {exc}") from exc
    A = np.array(vals, dtype=complex).reshape(rows, cols)
    if not np.all(np.isfinite(A)):
        raise InputError("matrix has non-finite entries")
    if square and rows != cols:
        raise InputError(f"expected a square matrix, got {rows}x{cols}")
    return A


def triple_to_json(T: OperatorTriple):
    return {name: matrix_to_json(X) for name, X in zip(("S1", "S2", "P"), T.matrices())}


def triple_from_json(obj, tol=DEFAULT_TOL) -> OperatorTriple:
    try:
        mats = [matrix_from_json(obj[name]) for name in ("S1", "S2", "P")]
    except (KeyError, TypeError) as exc:
        raise InputError(f"triple file needs S1, S2, P: {exc}") from exc
    return OperatorTriple(*mats, check=False, tol=tol)


def load_triple(path, tol=DEFAULT_TOL) -> OperatorTriple:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return triple_from_json(obj, tol)


def split_to_json(split, residuals):
    return {
        "dim_H1": split.dim_h1,
        "dim_H2": split.dim_h2,
        "H1": matrix_to_json(split.H1.frame),
        "H2": matrix_to_json(split.H2.frame),
        "blocks": {k: matrix_to_json(split.blocks[k]) for k in BLOCK_NAMES},
        "off_diag_residual": split.off_diag_residual,
        "violation_threshold": split.violation_threshold,
        "unitary_part_ok": split.unitary_part_ok,
        "cnu_part_ok": split.cnu_part_ok,
        "theorem_consistent": split.theorem_consistent,
        "residuals": residuals,
        "notes": split.notes,
    }


def _dump(obj):
    return json.dumps(obj, allow_nan=False, sort_keys=False)


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


# ---- tolerances -----------------------------------------------------------

def env_tolerances() -> Tolerances:
    """Default tolerances scaled by ``GAMMA3_TOL`` when that variable is set."""
    raw = os.environ.get("GAMMA3_TOL")
    if not raw:
        return DEFAULT_TOL
    try:
        factor = float(raw)
    except ValueError as exc:
        raise InputError(f"GAMMA3_TOL must be a positive number, got {raw!r}") from exc
    if not (math.isfinite(factor) and factor > 0):
        raise InputError(f"GAMMA3_TOL must be a positive number, got {raw!r}")
    return DEFAULT_TOL.scaled(factor)


def _membership_tol(tol: Tolerances) -> float:
    return MEMBERSHIP_TOL * tol.rank_tol / DEFAULT_TOL.rank_tol


# ---- subcommands ----------------------------------------------------------

def cmd_point(args, out):
    vals = args.values
    t = (complex(vals[0], vals[1]), complex(vals[2], vals[3]), complex(vals[4], vals[5]))
    mtol = _membership_tol(env_tolerances())
    result = {"point": [[z.real, z.imag] for z in t], "method": args.method}
    inside = []
    if args.method in ("roots", "both"):
        v = in_gamma3_roots(t, mtol)
        result["roots"] = v.to_dict()
        inside.append(v.inside)
    if args.method in ("fibered", "both"):
        v, c = in_gamma3_fibered(t, mtol)
        d = v.to_dict()
        d["max_root_modulus"] = _clean(d["max_root_modulus"])
        d["witness"] = None if c is None else [[c.c1.real, c.c1.imag], [c.c2.real, c.c2.imag]]
        result["fibered"] = d
        inside.append(v.inside)
    result["inside"] = all(inside)
    if args.method == "both":
        result["methods_agree"] = len(set(inside)) == 1
    out.write(_dump(result) + "\n")
    return EXIT_OK if result["inside"] else EXIT_FAIL


def _config(args, tol):
    kw = {"tol": tol, "membership_tol": _membership_tol(tol), "seed": args.seed}
    for name in ("n_polys", "degree", "slack", "grid"):
        v = getattr(args, name, None)
        if v is not None:
            kw["grid_per_dim" if name == "grid" else name] = v
    return BatteryConfig(**kw)


def cmd_certify(args, out):
    tol = env_tolerances()
    T = load_triple(args.triple, tol)
    cfg = _config(args, tol)
    if args.battery == "full":
        report = battery_gamma3_contraction(T, cfg)
        payload = report.to_dict()
        verdict = report.verdict
    elif args.battery == "pencil":
        report = battery_pencil(T, cfg)
        payload = report.to_dict()
        verdict = report.verdict
    elif args.battery == "vn":
        report = battery_von_neumann(T, cfg)
        payload = report.to_dict()
        verdict = report.verdict
    else:
        routes = {str(r): is_gamma3_unitary(T, r, tol, cfg.membership_tol) for r in (1, 3)}
        verdicts = {r.verdict for r in routes.values()}
        verdict = "pass" if verdicts == {"pass"} else "fail"
        payload = {
            "verdict": verdict,
            "routes": {k: r.to_dict() for k, r in routes.items()},
            "routes_agree": len(verdicts) == 1,
            "seed": args.seed,
        }
    payload["battery"] = args.battery
    out.write(_dump(payload) + "\n")
    return EXIT_OK if verdict == "pass" else EXIT_FAIL


def cmd_decompose(args, out):
    tol = env_tolerances()
    T = load_triple(args.triple, tol)
    split, residuals = split_triple(T, tol)
    payload = split_to_json(split, residuals)
    if args.out:
        Path(args.out).write_text(_dump(payload) + "\n", encoding="utf-8")
        summary = {k: payload[k] for k in (
            "dim_H1", "dim_H2", "off_diag_residual", "violation_threshold",
            "unitary_part_ok", "cnu_part_ok", "theorem_consistent", "residuals", "notes")}
        summary["out"] = str(args.out)
        out.write(_dump(summary) + "\n")
    else:
        out.write(_dump(payload) + "\n")
    return EXIT_OK if split.theorem_consistent else EXIT_FAIL


def _parse_dims(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise InputError(f"--dims must be comma-separated integers, got {text!r}") from exc


def _pairs(vals, k, flag):
    if vals is None:
        return None
    if len(vals) != 2 * k:
        raise InputError(f"{flag} takes {2 * k} numbers (re im pairs)")
    return tuple(complex(vals[2 * i], vals[2 * i + 1]) for i in range(k))


def cmd_generate(args, out):
    dims = _parse_dims(args.dims)
    if not dims:
        raise InputError("--dims is empty")
    kw = {}
    if args.radius is not None:
        kw["radius"] = args.radius
    if args.cnu:
        kw["cnu"] = args.cnu
    if args.point is not None:
        kw["point"] = _pairs(args.point, 3, "--point")
    if args.c is not None:
        kw["c"] = _pairs(args.c, 2, "--c")
    T, spec = generate(args.kind, dims, args.seed, **kw)
    triple = triple_to_json(T)
    result = {"spec": spec.to_dict()}
    if args.out:
        out_path = Path(args.out)
        out_path.write_text(_dump(triple) + "\n", encoding="utf-8")
        spec_path = Path(args.spec_out) if args.spec_out else out_path.with_suffix(".spec.json")
        spec_path.write_text(_dump(spec.to_dict()) + "\n", encoding="utf-8")
        result["triple_file"] = str(out_path)
        result["spec_file"] = str(spec_path)
    else:
        result["triple"] = triple
    out.write(_dump(result) + "\n")
    return EXIT_OK


def cmd_spectrum(args, out):
    tol = env_tolerances()
    T = load_triple(args.triple, tol)
    try:
        spec = joint_spectrum(T, tol)
    except ContractViolation as exc:
        raise InputError(str(exc)) from exc
    pts = [[[z.real, z.imag] for z in t.as_tuple()] for t in spec]
    out.write(_dump({"joint_spectrum": pts}) + "\n")
    return EXIT_OK


def cmd_pencil(args, out):
    tol = env_tolerances()
    T = load_triple(args.triple, tol)
    scan = pencil_scan(T, args.radial, args.angular)
    payload = scan.to_dict()
    payload["pass"] = scan.global_min >= -tol.psd_tol
    out.write(_dump(payload) + "\n")
    return EXIT_OK if payload["pass"] else EXIT_FAIL


def cmd_supnorm(args, out):
    try:
        terms = json.loads(args.poly)
    except json.JSONDecodeError as exc:
        raise InputError(f"--poly is not valid JSON: {exc}") from exc
    f = Poly3.from_json(terms)
    value = sup_norm_gamma3(f, args.grid)
    out.write(_dump({"sup_norm": value, "grid": args.grid, "lower_bound": True}) + "\n")
    return EXIT_OK


# ---- parser ---------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="gamma3", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("point", help="membership of (s1, s2, p)")
    p.add_argument("values", nargs=6, type=float, metavar="X",
                   help="s1_re s1_im s2_re s2_im p_re p_im")
    p.add_argument("--method", choices=("roots", "fibered", "both"), default="roots")
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("certify", help="run a certification battery on a triple file")
    p.add_argument("triple")
    p.add_argument("--battery", choices=("full", "pencil", "vn", "unitary"), default="full")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-polys", dest="n_polys", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--slack", type=float)
    p.add_argument("--grid", type=int)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("decompose", help="canonical decomposition of a triple file")
    p.add_argument("triple")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("generate", help="write a generated triple")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--dims", required=True, help="n, or n_unitary,n_cnu for mixed")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--radius", type=float)
    p.add_argument("--cnu", choices=("normal", "polynomial"))
    p.add_argument("--point", type=float, nargs=6, help="scalar kind: s1 s2 p as re im pairs")
    p.add_argument("--c", type=float, nargs=4, help="candidate_fibered: c1 c2 as re im pairs")
    p.add_argument("--out")
    p.add_argument("--spec-out", dest="spec_out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("spectrum", help="joint eigenvalues of a triple file")
    p.add_argument("triple")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("pencil", help="pencil positivity scan of a triple file")
    p.add_argument("triple")
    p.add_argument("--radial", type=int, default=8)
    p.add_argument("--angular", type=int, default=24)
    p.set_defaults(func=cmd_pencil)

    p = sub.add_parser("supnorm", help="torus-grid estimate of sup |f| over the tridisc image")
    p.add_argument("--poly", required=True, help='JSON list of {"e": [i,j,k], "c": [re,im]}')
    p.add_argument("--grid", type=int, default=64)
    p.set_defaults(func=cmd_supnorm)
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"gamma3: error: {exc}\n")
        return EXIT_INPUT
    except InputError as exc:
        err.write(f"gamma3: input error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
