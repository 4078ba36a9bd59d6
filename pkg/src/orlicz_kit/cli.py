"""``orlicz-kit`` command line.

Exit codes: 0 success, 1 a declared expectation was missed, 2 input error.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .acsob import acl_check
from .curve import read_family
from .errors import OrliczKitError
from .field import BoxGrid, luxemburg_norm, read_field
from .modulus import METHODS, SolverOptions, estimate_modulus_modular, estimate_modulus_norm
from .phi import phi_from_descriptor
from .scenario import EXIT_FAILED, EXIT_INPUT, EXIT_OK, builtin_scenarios, dumps, run_scenario


def _emit(report, out) -> None:
    text = dumps(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    code, report = run_scenario(args.config, out=None, out_dir=args.out_dir)
    if args.out:
        _emit(report, args.out)
    elif not args.quiet:
        _emit(report, None)
    for e in report["expectations"]:
        if not e["ok"]:
            got = "missing" if e["missing"] else e["actual"]
            print(f"{e['where']}: expectation missed: {e['stage']}.{e['path']} {e['expect']} (got {got})",
                  file=sys.stderr)
    return code


def cmd_list(args) -> int:
    for name in builtin_scenarios():
        print(name)
    return EXIT_OK


def cmd_norm(args) -> int:
    f = read_field(args.field, args.inf_is_null)
    phi = phi_from_descriptor(args.phi, f.grid.extents)
    res = luxemburg_norm(phi, f, args.tol)
    _emit({"phi": phi.describe(), "field": args.field, "grid": f.grid.spec(), **res.as_dict(args.trace)}, args.out)
    return EXIT_OK


def cmd_modulus(args) -> int:
    grid = BoxGrid.parse(args.grid)
    fam = read_family(args.curves)
    phi = phi_from_descriptor(args.phi, grid.extents)
    opts = SolverOptions(method=args.method)
    if args.max_iter is not None:
        opts.max_iter = args.max_iter
    out = {"phi": phi.describe(), "grid": grid.spec(), "curves": len(fam)}
    density = None
    if args.kind in ("modular", "both"):
        r = estimate_modulus_modular(phi, fam, grid, opts)
        out["modular"] = r.as_dict()
        density = r.density
    if args.kind in ("norm", "both"):
        r = estimate_modulus_norm(phi, fam, grid, opts)
        out["norm"] = r.as_dict()
        density = r.density
    if args.density_out and density is not None:
        from .field import write_field
        write_field(density, args.density_out)
    _emit(out, args.out)
    return EXIT_OK


def cmd_acl(args) -> int:
    coarse = read_field(args.field, args.inf_is_null)
    fine = read_field(args.field_fine, args.inf_is_null)
    rep = acl_check(coarse, fine, args.jump_tol)
    _emit(rep.as_dict(args.max_failing), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orlicz-kit", description="Generalized Orlicz space numerics.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file or builtin scenario")
    p.add_argument("config", help="path to an INI scenario, or a builtin name")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--out-dir", help="directory for relative output paths (default: the scenario's directory)")
    p.add_argument("-q", "--quiet", action="store_true", help="do not print the report")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("list", help="list builtin scenarios")
    p.set_defaults(fn=cmd_list)

    p = sub.add_parser("norm", help="Luxemburg norm of a fieldv1 file")
    p.add_argument("--phi", required=True, help="integrand descriptor, e.g. power:p=2")
    p.add_argument("--field", required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--inf-is-null", action="store_true", help="treat inf nodes as a null set")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_norm)

    p = sub.add_parser("modulus", help="modulus estimates of a curvev1 family")
    p.add_argument("--phi", required=True)
    p.add_argument("--curves", required=True)
    p.add_argument("--grid", required=True, help="grid spec, e.g. 0:1:65,0:1:65")
    p.add_argument("--kind", choices=("norm", "modular", "both"), default="both")
    p.add_argument("--method", choices=METHODS, default="pdhg")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--density-out", help="write the last density as fieldv1")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_modulus)

    p = sub.add_parser("acl", help="two-resolution ACL diagnostic")
    p.add_argument("--field", required=True)
    p.add_argument("--field-fine", required=True)
    p.add_argument("--jump-tol", type=float)
    p.add_argument("--inf-is-null", action="store_true")
    p.add_argument("--max-failing", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_acl)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.fn(args)
    except OrliczKitError as exc:
        print(f"orlicz-kit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"orlicz-kit: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"orlicz-kit: error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_FAILED", "EXIT_INPUT"]
