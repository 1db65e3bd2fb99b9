"""Command-line interface.

Subcommands: direct, inverse, validate, roundtrip, fixtures. Inputs are JSON
documents (see the schemas directory); outputs are JSON plus plot-ready CSV
traces. All algorithms are deterministic, so identical inputs and
configuration produce byte-identical outputs.

Exit codes: 0 success; 1 validation verdict failed (or round-trip thresholds
exceeded); 2 malformed/invalid input; 3 solver failure; 4 scattering tail not
settled (extend the k grid); 5 validation inconclusive only.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import errors as err
from .characterize import (
    FAIL,
    INCONCLUSIVE,
    CharacterizeConfig,
    check_unitarity_symmetry,
    marchenko_class_report,
)
from .direct import DirectConfig, solve_direct
from .inverse import InverseConfig, invert
from .oracles import standard_fixtures
from .types import (
    BoundaryCondition,
    Potential,
    ScatteringData,
    boundary_equivalent,
)

EXIT_OK = 0
EXIT_VERDICT_FAIL = 1
EXIT_BAD_INPUT = 2
EXIT_SOLVER = 3
EXIT_TAIL = 4
EXIT_INCONCLUSIVE = 5

_VALIDATION_ERRORS = (
    err.DimensionMismatch,
    err.SelfadjointnessViolated,
    err.RankDeficient,
    err.NotHermitian,
    err.NonFiniteSample,
    err.AsymmetricGrid,
    err.BadBoundState,
)


class _CliFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise _CliFailure(EXIT_BAD_INPUT, f"input file not found: {path}")
    except json.JSONDecodeError as exc:
        raise _CliFailure(EXIT_BAD_INPUT, f"malformed JSON in {path}: {exc}")


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.16e}" if isinstance(v, float) else str(v) for v in row))
            fh.write("\n")


def _matrix_columns(prefix, n):
    cols = []
    for a in range(n):
        for b in range(n):
            cols.append(f"{prefix}_re_{a}{b}")
            cols.append(f"{prefix}_im_{a}{b}")
    return cols


def _matrix_row(M):
    out = []
    for a in range(M.shape[0]):
        for b in range(M.shape[1]):
            out.append(float(M[a, b].real))
            out.append(float(M[a, b].imag))
    return out


def _load_potential(path):
    try:
        return Potential.from_dict(_load_json(path))
    except _CliFailure:
        raise
    except (_VALIDATION_ERRORS + (KeyError, ValueError, TypeError)) as exc:
        raise _CliFailure(EXIT_BAD_INPUT, f"invalid potential in {path}: {exc}")


def _load_boundary(path):
    try:
        return BoundaryCondition.from_dict(_load_json(path))
    except _CliFailure:
        raise
    except (_VALIDATION_ERRORS + (KeyError, ValueError, TypeError)) as exc:
        raise _CliFailure(EXIT_BAD_INPUT, f"invalid boundary condition in {path}: {exc}")


def _load_scattering(path):
    try:
        return ScatteringData.from_dict(_load_json(path))
    except _CliFailure:
        raise
    except (_VALIDATION_ERRORS + (KeyError, ValueError, TypeError)) as exc:
        raise _CliFailure(EXIT_BAD_INPUT, f"invalid scattering data in {path}: {exc}")


def _configs(args):
    raw = _load_json(args.config) if getattr(args, "config", None) else {}
    dcfg = DirectConfig(**raw.get("direct", {}))
    icfg = InverseConfig(**raw.get("inverse", {}))
    ccfg = CharacterizeConfig(**raw.get("characterize", {}))
    rt = raw.get("roundtrip", {})
    return dcfg, icfg, ccfg, rt


def _limit_threads(n):
    if n is None:
        return
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=int(n))
    except ImportError:
        pass  # thread count is a performance hint only


def _out_dir(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_direct(args):
    dcfg, _, _, _ = _configs(args)
    pot = _load_potential(args.potential)
    bc = _load_boundary(args.boundary)
    if pot.n != bc.n:
        raise _CliFailure(EXIT_BAD_INPUT,
                          f"size mismatch: potential n={pot.n}, boundary n={bc.n}")
    data, bundle = solve_direct(pot, bc, dcfg)
    out = _out_dir(args)
    _write_json(out / "scattering.json", data.to_dict())
    header = ["k"] + _matrix_columns("S", data.n)
    rows = [[float(k)] + _matrix_row(S) for k, S in zip(data.k_grid, data.S_values)]
    _write_csv(out / "scattering.csv", header, rows)
    bs_rows = [[b.kappa, b.multiplicity] + _matrix_row(b.M) for b in data.bound_states]
    _write_csv(out / "bound_states.csv",
               ["kappa", "multiplicity"] + _matrix_columns("M", data.n), bs_rows)
    print(f"wrote scattering data for n={data.n}, "
          f"{len(data.bound_states)} bound state(s) -> {out}")
    return EXIT_OK


def cmd_inverse(args):
    _, icfg, ccfg, _ = _configs(args)
    data = _load_scattering(args.scattering)
    pre = check_unitarity_symmetry(data, ccfg)
    if pre.status == FAIL:
        raise _CliFailure(EXIT_BAD_INPUT,
                          f"scattering data rejected: {pre.detail}")
    res = invert(data, icfg)
    out = _out_dir(args)
    _write_json(out / "potential.json", res.potential.to_dict())
    _write_json(out / "boundary.json", res.boundary.to_dict())
    _write_json(out / "diagnostics.json", {
        "S_inf_re": res.S_inf.real.tolist(),
        "S_inf_im": res.S_inf.imag.tolist(),
        "G1_re": res.G1.real.tolist(),
        "G1_im": res.G1.imag.tolist(),
    })
    n = data.n
    _write_csv(out / "potential.csv", ["x"] + _matrix_columns("V", n),
               [[float(x)] + _matrix_row(V)
                for x, V in zip(res.potential.xs, res.potential.values)])
    _write_csv(out / "marchenko_F.csv", ["y"] + _matrix_columns("F", n),
               [[float(y)] + _matrix_row(F)
                for y, F in zip(res.kernel.F_y, res.kernel.F_values)])
    print(f"recovered potential and boundary -> {out}")
    return EXIT_OK


def cmd_validate(args):
    _, icfg, ccfg, _ = _configs(args)
    data = _load_scattering(args.scattering)
    report = marchenko_class_report(data, ccfg, icfg)
    out = _out_dir(args)
    _write_json(out / "report.json", report.to_dict())
    for c in report.checks:
        print(f"{c.name}: {c.status}  ({c.detail})")
    print(f"overall: {report.status}")
    if report.status == FAIL:
        return EXIT_VERDICT_FAIL
    if report.status == INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_roundtrip(args):
    dcfg, icfg, _, rt = _configs(args)
    pot = _load_potential(args.potential)
    bc = _load_boundary(args.boundary)
    v_tol = float(rt.get("v_rel_l1_tol", 5e-2))
    s_tol = float(rt.get("s_reproduction_tol", 1e-3))
    bc_tol = float(rt.get("bc_equivalence_tol", 1e-3))
    window = float(rt.get("v_window_fraction", 0.8))
    k_cap = float(rt.get("s_window_k", 30.0))

    data, _ = solve_direct(pot, bc, dcfg)
    res = invert(data, icfg)
    data2, _ = solve_direct(res.potential, res.boundary, dcfg)

    xs = res.potential.xs
    Vr = res.potential.values
    Vt = pot.evaluate(xs)
    m = xs <= window * pot.x_max
    num = np.trapezoid(np.linalg.norm((Vr - Vt)[m], ord=2, axis=(1, 2)), xs[m])
    den = np.trapezoid(np.linalg.norm(Vt[m], ord=2, axis=(1, 2)), xs[m])
    v_err = float(num / den) if den > 0 else float(num)
    mk = np.abs(data.k_grid) <= k_cap
    s_err = float(np.abs(data2.S_values[mk] - data.S_values[mk]).max())
    bc_ok = boundary_equivalent(res.boundary, bc, tol=bc_tol)

    report = {
        "v_rel_l1_error": v_err,
        "v_rel_l1_tol": v_tol,
        "s_reproduction_error": s_err,
        "s_reproduction_tol": s_tol,
        "boundary_equivalent": bool(bc_ok),
        "bound_states_found": len(data.bound_states),
    }
    out = _out_dir(args)
    _write_json(out / "roundtrip.json", report)
    ok = v_err <= v_tol and s_err <= s_tol and bc_ok
    print(f"V relative L1 error {v_err:.3e} (tol {v_tol:.1e}); "
          f"S reproduction {s_err:.3e} (tol {s_tol:.1e}); "
          f"boundary equivalent: {bc_ok}")
    return EXIT_OK if ok else EXIT_VERDICT_FAIL


def cmd_fixtures(args):
    out = _out_dir(args)
    names = []
    for name, pot, bc in standard_fixtures():
        _write_json(out / f"{name}.potential.json", pot.to_dict())
        _write_json(out / f"{name}.boundary.json", bc.to_dict())
        names.append(name)
    _write_json(out / "fixtures.json", {"names": names})
    print(f"wrote {len(names)} fixture(s) -> {out}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="halfline",
        description="Direct and inverse scattering transforms for the "
                    "half-line matrix Schrodinger equation.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *needs):
        if "potential" in needs:
            p.add_argument("--potential", required=True, help="potential JSON file")
        if "boundary" in needs:
            p.add_argument("--boundary", required=True, help="boundary condition JSON file")
        if "scattering" in needs:
            p.add_argument("--scattering", required=True, help="scattering data JSON file")
        p.add_argument("--config", help="JSON config with direct/inverse/characterize/roundtrip sections")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--threads", type=int, help="BLAS thread cap (performance hint)")

    p = sub.add_parser("direct", help="potential + boundary -> scattering data")
    common(p, "potential", "boundary")
    p.set_defaults(func=cmd_direct)

    p = sub.add_parser("inverse", help="scattering data -> potential + boundary")
    common(p, "scattering")
    p.set_defaults(func=cmd_inverse)

    p = sub.add_parser("validate", help="admissibility report for scattering data")
    common(p, "scattering")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("roundtrip", help="direct then inverse; report discrepancies")
    common(p, "potential", "boundary")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("fixtures", help="emit the standard fixture corpus")
    common(p)
    p.set_defaults(func=cmd_fixtures)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    _limit_threads(getattr(args, "threads", None))
    try:
        return args.func(args)
    except _CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except err.TailNotSettled as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TAIL
    except err.ScatteringError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
