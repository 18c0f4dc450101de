"""End-to-end analysis: estimate, certificate, witness, oracle cross-check.

Assembles the report consumed by the CLI.  Every number in the report is
recomputable from the echoed family, and for a fixed configuration the
report is byte-stable (timings are collected only on request since they
would break that)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

from .certificates import psi
from .extremal import build_witness, solve_sbar, verify_membership
from .family import BallFamily, check_general_position, perturb, serialize
from .oracle import compare, minimize

WITNESS_TOL = 1e-9


@dataclass(frozen=True)
class AnalysisOptions:
    cap: Optional[int] = None
    threads: int = 1
    gp_tol: float = 1e-10
    oracle_tol: float = 1e-6
    perturb_delta: float = 1e-7
    perturb_seed: int = 0
    grid_levels: int = 7
    refine_tol: float = 1e-9
    oracle_mode: str = "auto"
    dense_verify: bool = False
    timings: bool = False


def analyze(f: BallFamily, opts: AnalysisOptions = AnalysisOptions()) -> dict:
    """Run the full pipeline and return the report dict.

    The report's "ok" field is True iff the oracle verdict passed, the
    witness lies in every ball, and the witness q-norm reproduces the
    estimate it was built for.  When the family is not in general position
    the witness is built on an auto-perturbed copy (delta and seed are
    recorded); the headline estimate always refers to the original family.
    """
    marks: list[tuple[str, float]] = [("start", time.perf_counter())]

    def mark(name: str):
        marks.append((name, time.perf_counter()))

    gp = check_general_position(f, tol=opts.gp_tol)
    mark("general_position")

    psi_kwargs = {"threads": opts.threads}
    if opts.cap is not None:
        psi_kwargs["cap"] = opts.cap
    ps = psi(f, **psi_kwargs)
    mark("psi")

    if gp.ok:
        wf, ps_w, perturbed = f, ps, False
    else:
        wf = perturb(f, opts.perturb_delta, seed=opts.perturb_seed)
        ps_w = psi(wf, **psi_kwargs)
        perturbed = True
    s = solve_sbar(wf, ps_w.best, tol=min(opts.gp_tol, opts.perturb_delta / 10.0)
                   if perturbed else opts.gp_tol)
    witness = build_witness(wf, ps_w.best, s)
    dense = opts.dense_verify and wf.ks.kprod <= 4096
    membership = verify_membership(witness, wf, tol=WITNESS_TOL, dense=dense)
    value_gap = abs(witness.log_q_norm - ps_w.log_psi)
    mark("witness")

    orc = minimize(f, grid_levels=opts.grid_levels, refine_tol=opts.refine_tol,
                   mode=opts.oracle_mode)
    verdict = compare(ps, orc, tol=opts.oracle_tol)
    mark("oracle")

    witness_block = witness.to_dict()
    witness_block.update({
        "membership": membership.to_dict(),
        "value_identity_gap": value_gap,
        "value_identity_ok": value_gap <= WITNESS_TOL,
        "perturbed": perturbed,
    })
    if perturbed:
        witness_block["perturb"] = {"delta": opts.perturb_delta,
                                    "seed": opts.perturb_seed}
        witness_block["log_psi_perturbed"] = ps_w.log_psi
        witness_block["family_perturbed"] = serialize(wf)

    oracle_block = orc.to_dict()
    oracle_block.update(verdict.to_dict())

    gp_block = gp.to_dict()
    gp_block["auto_perturbed"] = perturbed

    ok = bool(verdict.passed and membership.ok
              and witness_block["value_identity_ok"])
    report = {
        "family": serialize(f),
        "log_psi": ps.log_psi,
        "psi": math.exp(ps.log_psi),
        "best_certificate": ps.best.to_dict(),
        "counts": ps.counts,
        "general_position": gp_block,
        "witness": witness_block,
        "oracle": oracle_block,
        "warnings": list(f.warnings),
        "ok": ok,
    }
    if opts.timings:
        report["timings"] = {
            name: marks[i][1] - marks[i - 1][1]
            for i, (name, _) in enumerate(marks) if i > 0
        }
    return report
