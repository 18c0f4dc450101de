"""Command-line front end.

Commands:
    psi      full report: estimate, certificate, witness, oracle verdict
    sweep    recompute the estimate along one grid axis, emit CSV + slope fit
    check    randomized invariant suite over seeded families
    witness  witness-only rerun (box shape, margins, optional tensor dump)
    oracle   oracle-only run

Exit codes: 0 all checks passed, 1 input error, 2 a verification failed.
Reports are byte-identical across runs and thread counts for a fixed
configuration; pass --timings to add (non-deterministic) wall times.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from .certificates import EnumerationCapError, psi
from .checks import TrialBounds, run_suite
from .extremal import build_witness, dense_tensor_bytes, solve_sbar, verify_membership
from .family import FamilyError, PerturbationError, check_general_position, perturb, serialize, validate
from .oracle import minimize
from .report import WITNESS_TOL, AnalysisOptions, analyze
from .sweeps import fit_run, sweep_axis

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_CHECK_FAILED = 2

THREADS_ENV = "WIDTHCALC_THREADS"


def _load_family(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return validate(raw)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise FamilyError(f"{THREADS_ENV}={env!r} is not an integer")
    return 1


def _options(args) -> AnalysisOptions:
    return AnalysisOptions(
        cap=args.cap,
        threads=_resolve_threads(args),
        gp_tol=args.tol,
        oracle_tol=args.oracle_tol,
        perturb_delta=args.perturb_delta,
        perturb_seed=args.seed,
        grid_levels=args.grid_levels,
        refine_tol=args.refine_tol,
        dense_verify=args.dense_verify,
        timings=args.timings,
    )


def cmd_psi(args) -> int:
    family = _load_family(args.config)
    report = analyze(family, _options(args))
    _emit(_json_text(report), args.out)
    if args.plot:
        from .plots import render_margin_figure

        render_margin_figure(report, args.plot)
    return EXIT_OK if report["ok"] else EXIT_CHECK_FAILED


def cmd_sweep(args) -> int:
    family = _load_family(args.config)
    axis = args.axis - 1
    rows = sweep_axis(family, axis, args.kvalues, cap=args.cap,
                      threads=_resolve_threads(args))
    fit = fit_run(rows, axis, family.q)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k_i", "log_psi", "best_certificate_id"])
    for r in rows:
        writer.writerow([r.k, repr(r.log_psi), r.cert.cert_id])
    _emit(buf.getvalue(), args.out)

    fit_text = _json_text(fit)
    if args.out:
        sys.stdout.write(fit_text)
    else:
        sys.stderr.write(fit_text)

    if args.plot:
        from .plots import render_sweep_figure

        render_sweep_figure(rows, fit, args.plot)
    return EXIT_OK


def cmd_check(args) -> int:
    bounds = TrialBounds()
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            bounds = TrialBounds.from_dict(json.load(fh))
    summary = run_suite(args.trials, args.seed, bounds)
    _emit(_json_text(summary), args.out)
    return EXIT_OK if summary["ok"] else EXIT_CHECK_FAILED


def cmd_witness(args) -> int:
    family = _load_family(args.config)
    gp = check_general_position(family, tol=args.tol)
    threads = _resolve_threads(args)
    kwargs = {"threads": threads}
    if args.cap is not None:
        kwargs["cap"] = args.cap
    if gp.ok:
        wf, perturbed = family, False
    else:
        wf, perturbed = perturb(family, args.perturb_delta, seed=args.seed), True
    res = psi(wf, **kwargs)
    s = solve_sbar(wf, res.best)
    witness = build_witness(wf, res.best, s)
    dense = args.dense_verify and wf.ks.kprod <= 4096
    membership = verify_membership(witness, wf, tol=WITNESS_TOL, dense=dense)

    out = witness.to_dict()
    out.update({
        "membership": membership.to_dict(),
        "log_psi": res.log_psi,
        "perturbed": perturbed,
    })
    if perturbed:
        out["perturb"] = {"delta": args.perturb_delta, "seed": args.seed}
        out["family_perturbed"] = serialize(wf)
    _emit(_json_text(out), args.out)

    if args.dump_tensor:
        if wf.ks.kprod > 4096:
            raise FamilyError(
                f"--dump-tensor requires kprod <= 4096, got {wf.ks.kprod}")
        with open(args.dump_tensor, "wb") as fh:
            fh.write(dense_tensor_bytes(witness, wf.ks))
    return EXIT_OK if membership.ok else EXIT_CHECK_FAILED


def cmd_oracle(args) -> int:
    family = _load_family(args.config)
    orc = minimize(family, grid_levels=args.grid_levels,
                   refine_tol=args.refine_tol, mode=args.oracle_mode)
    out = orc.to_dict()
    out["value"] = math.exp(orc.log_value)
    _emit(_json_text(out), args.out)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the primary output to this file")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (fallback: ${THREADS_ENV}, then 1)")
    p.add_argument("--cap", type=int, default=None,
                   help="enumeration cap on (tuple, I) pairs (default 1e7)")
    p.add_argument("--tol", type=float, default=1e-10,
                   help="general-position / rank tolerance (default 1e-10)")
    p.add_argument("--oracle-tol", type=float, default=1e-6,
                   help="oracle comparison tolerance (default 1e-6)")
    p.add_argument("--grid-levels", type=int, default=7,
                   help="oracle lattice refinement depth (default 7)")
    p.add_argument("--refine-tol", type=float, default=1e-9,
                   help="oracle refinement stall threshold (default 1e-9)")
    p.add_argument("--perturb-delta", type=float, default=1e-7,
                   help="auto-perturbation magnitude (default 1e-7)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for auto-perturbation (default 0)")
    p.add_argument("--dense-verify", action="store_true",
                   help="cross-check norms on the dense tensor (kprod <= 4096)")
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock timings (breaks byte determinism)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="widthcalc",
        description="Width estimates and certificates for intersections of "
                    "anisotropic balls")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("psi", help="full report for a family")
    p.add_argument("config", help="family JSON file")
    p.add_argument("--plot", help="render witness margins to this image file")
    _add_common(p)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("sweep", help="sweep one grid axis, emit CSV + slope fit")
    p.add_argument("config", help="family JSON file")
    p.add_argument("--axis", type=int, required=True, help="axis to sweep, 1-based")
    p.add_argument("--kvalues", type=int, nargs="+", required=True,
                   help="increasing grid sides to sweep over")
    p.add_argument("--plot", help="render the scaling figure to this image file")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="randomized invariant suite")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--config", default=None, help="JSON file with size bounds")
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("witness", help="witness-only rerun")
    p.add_argument("config", help="family JSON file")
    p.add_argument("--dump-tensor",
                   help="write the dense witness (little-endian float64, "
                        "index 1 fastest) to this file")
    _add_common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("oracle", help="oracle-only run")
    p.add_argument("config", help="family JSON file")
    p.add_argument("--oracle-mode", choices=("auto", "exact", "grid"),
                   default="auto")
    _add_common(p)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FamilyError, PerturbationError, EnumerationCapError,
            json.JSONDecodeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
