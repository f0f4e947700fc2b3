"""Command-line front end.

Subcommands:

* ``run``    — build one configuration, execute checks, write a JSON report.
* ``golden`` — regression-compare (or regenerate) the pinned report matrix.
* ``export`` — write the boundary flux operator as MatrixMarket + JSON.

Exit codes: 0 all requested checks passed; 1 at least one check failed
(failing names on stderr); 2 configuration / input errors.
"""

import argparse
import json
import os
import sys


def _cap_threads():
    cap = os.environ.get("HODGE_DN_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)


_cap_threads()

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

# the pinned regression matrix: (shape, res, field, checks or None for all)
GOLDEN_MATRIX = [
    ("interval", 8, "zero", None),
    ("interval", 16, "zero", None),
    ("square", 4, "zero", None),
    ("square", 8, "zero", None),
    ("disk", 4, "zero", None),
    ("disk", 8, "zero", None),
    ("annulus", 8, "zero", None),
    ("annulus", 16, "zero", None),
    ("annulus", 8, "rotation(s=1)", None),
    ("annulus", 16, "rotation(s=1)", None),
    ("square", 4, "rotation(s=1)", None),
    ("square", 8, "rotation(s=1)", None),
    ("solid_torus", 6, "zero",
     ("identities", "harmonic", "equivariant")),
    ("solid_torus", 8, "zero",
     ("identities", "harmonic", "equivariant")),
    ("solid_torus", 8, "rotation(s=1)", None),
    ("solid_torus", 12, "rotation(s=1)", None),
    ("ball", 2, "zero", ("identities", "harmonic", "equivariant")),
    ("ball", 3, "zero", ("identities", "harmonic", "equivariant")),
]

# per-field comparison policy for golden files: keys matched by suffix
GOLDEN_TOLERANCES = {
    "residual": 1e-7,
    "angle": 1e-6,
    "green_residual": 1e-9,
    "default_atol": 1e-7,
    "default_rtol": 1e-5,
}


def _split_tol_overrides(argv):
    """Pull --tol.<name> <value> / --tol.<name>=<value> pairs out of argv."""
    rest, overrides = [], {}
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg.startswith("--tol."):
            key = arg[len("--tol."):]
            if "=" in key:
                key, val = key.split("=", 1)
            else:
                i += 1
                if i >= len(argv):
                    raise ValueError(f"missing value for --tol.{key}")
                val = argv[i]
            overrides[key] = float(val)
        else:
            rest.append(arg)
        i += 1
    return rest, overrides


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hodge-dn",
        description="Boundary-data cohomology checks for invariant "
                    "differential forms on triangulated manifolds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p):
        p.add_argument("--shape", choices=[
            "interval", "square", "disk", "annulus", "solid_torus", "ball"])
        p.add_argument("--res", type=int, default=8)
        p.add_argument("--mesh", help="path to an OFF mesh file")
        p.add_argument("--field", default="zero",
                       help="'zero' or 'rotation(s=<rational>[,L=<rational>])'")
        p.add_argument("--seed", type=int, default=0)

    run_p = sub.add_parser("run", help="run checks and write a JSON report")
    add_config_flags(run_p)
    run_p.add_argument("--checks", default=",".join(
        ("identities", "harmonic", "dn", "recovery", "sequence", "cup",
         "equivariant")))
    run_p.add_argument("--out", help="report path (default: stdout)")

    gold_p = sub.add_parser("golden", help="compare pinned regression reports")
    gold_p.add_argument("--update", action="store_true",
                        help="rewrite the golden files from current code")
    gold_p.add_argument("--dir", default=None,
                        help="golden directory (default: goldens/ at repo "
                             "root or alongside the package)")

    exp_p = sub.add_parser("export", help="export the flux operator")
    add_config_flags(exp_p)
    exp_p.add_argument("--parity", type=int, choices=(0, 1), default=0)
    exp_p.add_argument("--out", required=True,
                       help="output prefix; writes <out>.mtx and <out>.json")
    return parser


def _make_config(args, checks=None):
    from .config import DEFAULT_TOLERANCES
    from .fields import parse_field
    from .report import ALL_CHECKS, RunConfig

    if checks is None:
        checks = tuple(c.strip() for c in
                       getattr(args, "checks", ",".join(ALL_CHECKS)).split(",")
                       if c.strip())
    unknown = set(checks) - set(ALL_CHECKS)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}; "
                         f"choose from {list(ALL_CHECKS)}")
    if args.mesh is None and args.shape is None:
        raise ValueError("one of --shape or --mesh is required")
    tol = DEFAULT_TOLERANCES.with_overrides(getattr(args, "tol_overrides", {}))
    return RunConfig(
        shape=args.shape,
        res=args.res,
        mesh=args.mesh,
        field=parse_field(args.field),
        checks=tuple(checks),
        seed=args.seed,
        tol=tol,
    )


def _cmd_run(args):
    from .report import run_checks

    config = _make_config(args)
    report, ok = run_checks(config)
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if not ok:
        failing = [k for k, v in report["passed"].items() if v is False]
        print("failed checks: " + ", ".join(failing), file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _golden_dir(explicit):
    if explicit:
        return explicit
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")


def _golden_name(shape, res, field):
    tag = field.replace("(", "_").replace(")", "").replace("=", "") \
        .replace(",", "_").replace(" ", "")
    return f"{shape}_r{res}_{tag}.json"


def _numeric_close(ref, got, key, tols):
    atol = tols.get("default_atol", 1e-7)
    rtol = tols.get("default_rtol", 1e-5)
    for suffix, t in tols.items():
        if suffix.startswith("default"):
            continue
        if key.endswith(suffix):
            atol = t
            break
    return abs(got - ref) <= atol + rtol * abs(ref)


def _compare(ref, got, tols, path=""):
    """Recursive comparison; returns list of drift messages."""
    drift = []
    if isinstance(ref, dict) and isinstance(got, dict):
        for k in sorted(set(ref) | set(got)):
            if k not in ref:
                drift.append(f"{path}/{k}: unexpected new field")
            elif k not in got:
                drift.append(f"{path}/{k}: missing field")
            else:
                drift.extend(_compare(ref[k], got[k], tols, f"{path}/{k}"))
        return drift
    if isinstance(ref, list) and isinstance(got, list):
        if len(ref) != len(got):
            return [f"{path}: length {len(got)} != {len(ref)}"]
        for i, (r, g) in enumerate(zip(ref, got)):
            drift.extend(_compare(r, g, tols, f"{path}[{i}]"))
        return drift
    if isinstance(ref, bool) or isinstance(got, bool):
        if bool(ref) != bool(got):
            drift.append(f"{path}: {got} != {ref}")
        return drift
    if isinstance(ref, (int, float)) and isinstance(got, (int, float)):
        if isinstance(ref, int) and isinstance(got, int):
            if ref != got:
                drift.append(f"{path}: {got} != {ref}")
        elif not _numeric_close(float(ref), float(got),
                                path.rsplit("/", 1)[-1], tols):
            drift.append(f"{path}: {got} != {ref}")
        return drift
    if ref != got:
        drift.append(f"{path}: {got!r} != {ref!r}")
    return drift


def _cmd_golden(args):
    from .fields import parse_field
    from .report import ALL_CHECKS, RunConfig, run_checks

    directory = _golden_dir(args.dir)
    os.makedirs(directory, exist_ok=True)
    any_drift = False
    for shape, res, field, checks in GOLDEN_MATRIX:
        config = RunConfig(shape=shape, res=res, field=parse_field(field),
                           checks=tuple(checks) if checks else ALL_CHECKS)
        report, _ = run_checks(config)
        fname = os.path.join(directory, _golden_name(shape, res, field))
        if args.update:
            payload = {"tolerances": GOLDEN_TOLERANCES, "report": report}
            with open(fname, "w") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")
            print(f"wrote {fname}")
            continue
        if not os.path.exists(fname):
            print(f"missing golden file {fname}", file=sys.stderr)
            any_drift = True
            continue
        with open(fname) as fh:
            payload = json.load(fh)
        drift = _compare(payload["report"], report,
                         payload.get("tolerances", GOLDEN_TOLERANCES))
        if drift:
            any_drift = True
            print(f"{fname}: {len(drift)} drifting fields", file=sys.stderr)
            for line in drift[:20]:
                print("  " + line, file=sys.stderr)
        else:
            print(f"ok {os.path.basename(fname)}")
    return EXIT_CHECK_FAILED if any_drift else EXIT_OK


def _cmd_export(args):
    import numpy as np
    import scipy.io
    import scipy.sparse as sp

    from . import dn
    from .report import build_from_config

    config = _make_config(args, checks=())
    st = build_from_config(config)
    mp = dn.assemble_dn(st, args.parity, tol=config.tol)
    scipy.io.mmwrite(args.out + ".mtx", sp.csr_matrix(mp.matrix))
    meta = {
        "config": config.describe(),
        "parity_in": mp.parity,
        "parity_out": mp.out_parity,
        "shape": list(mp.matrix.shape),
        "rank": int(mp.rank),
        "residuals": {k: float(v) for k, v in mp.residuals.items()},
        "norm": float(np.linalg.norm(mp.matrix)),
    }
    with open(args.out + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out}.mtx and {args.out}.json")
    return EXIT_OK


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv, overrides = _split_tol_overrides(argv)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG_ERROR
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG_ERROR if exc.code not in (0, None) else 0
    args.tol_overrides = overrides

    from .errors import CheckFailure, HodgeDnError

    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "golden":
            return _cmd_golden(args)
        if args.command == "export":
            return _cmd_export(args)
    except CheckFailure as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CHECK_FAILED
    except (HodgeDnError, KeyError, ValueError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
