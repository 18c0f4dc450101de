"""Acceptance gate: every criterion at its stated tolerance, one printed
pass/fail line per criterion (run with ``pytest -s`` to see them)."""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from widthcalc import (
    ExponentVector,
    GridShape,
    QParam,
    build_witness,
    compare,
    fit_run,
    minimize,
    mixed_norm,
    perturb,
    phi,
    psi,
    replacement_vertex,
    solve_sbar,
    sweep_axis,
    validate,
    verify_membership,
)
from widthcalc.checks import random_family
from widthcalc.geometry import PointSet, barycentric

from conftest import GOLDEN_RAW, make_replacement_trial

N_SUITE = 200
SUITE_SEED_BASE = 424_200


def _report(cid: str, desc: str, ok: bool, detail: str = ""):
    line = f"[ACCEPTANCE] {cid} {desc}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def suite():
    """200 seeded random families with psi, oracle, and witness results."""
    t0 = time.perf_counter()
    records = []
    for t in range(N_SUITE):
        f = random_family(SUITE_SEED_BASE + t)
        ps = psi(f)
        orc = minimize(f)          # exact for <= 3 balls, grid+refine for 4
        s = solve_sbar(f, ps.best)
        w = build_witness(f, ps.best, s)
        membership = verify_membership(w, f, tol=1e-9)
        records.append({
            "family": f, "psi": ps, "oracle": orc, "witness": w,
            "membership": membership,
        })
    return records, time.perf_counter() - t0


def test_c1_worked_example_golden_values():
    t0 = time.perf_counter()
    f = validate(GOLDEN_RAW)
    ps = psi(f)
    s = solve_sbar(f, ps.best)
    w = build_witness(f, ps.best, s)
    elapsed = time.perf_counter() - t0
    ok = (
        abs(math.exp(ps.log_psi) - 2.0) <= 1e-9
        and ps.best.m == 2
        and max(abs(l - 0.5) for l in ps.best.lam) <= 1e-9
        and abs(s[0] - 4.0) <= 1e-9
        and all(abs(m) <= 1e-9 for m in w.log_margins.values())
        and abs(math.exp(w.log_q_norm) - 2.0) <= 1e-9
        and elapsed < 1.0
    )
    _report("C1", "worked-example golden values", ok,
            f"psi={math.exp(ps.log_psi):.12g}, s={s[0]:.12g}, {elapsed * 1e3:.0f} ms")


def test_c2_oracle_equality_over_seeded_suite(suite):
    records, elapsed = suite
    worst = 0.0
    failures = 0
    modes = set()
    for rec in records:
        verdict = compare(rec["psi"], rec["oracle"], tol=1e-6)
        worst = max(worst, abs(verdict.gap))
        modes.add(rec["oracle"].mode)
        if not verdict.passed:
            failures += 1
    ok = failures == 0 and elapsed < 300.0 and modes == {"exact", "grid+refine"}
    _report("C2", f"oracle equality on {len(records)} families", ok,
            f"worst |gap|={worst:.3e}, {elapsed:.1f} s, modes={sorted(modes)}")


def test_c3_witness_suite(suite):
    records, _ = suite
    worst_margin = 0.0
    worst_value_gap = 0.0
    failures = 0
    for rec in records:
        margin = rec["membership"].worst_margin
        value_gap = abs(rec["witness"].log_q_norm - rec["psi"].log_psi)
        worst_margin = min(worst_margin, margin)
        worst_value_gap = max(worst_value_gap, value_gap)
        if margin < -1e-9 or value_gap > 1e-9:
            failures += 1
    ok = failures == 0
    _report("C3", f"witness membership and value identity on {len(records)} families",
            ok, f"worst margin={worst_margin:.3e}, worst value gap={worst_value_gap:.3e}")


def test_c4_single_ball_closed_form():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        u = ExponentVector(tuple(rng.uniform(0, 1, d)))
        ks = GridShape(tuple(int(k) for k in rng.integers(2, 65, d)))
        q = QParam(float(rng.choice([1.0, 1.5, 2.0])))
        nu = float(np.exp(rng.uniform(-2, 2)))
        f = validate({"q": q.q, "k": list(ks.k),
                      "balls": [{"nu": nu, "u": list(u.u)}]})
        gap = abs(psi(f).log_psi - (math.log(nu) + phi(u, ks, q)))
        worst = max(worst, gap)
    ok = worst <= 1e-12
    _report("C4", "single-ball closed form on 100 balls", ok,
            f"worst log gap={worst:.3e}")


def test_c5_interpolation_inequality():
    rng = np.random.default_rng(77)
    failures = 0
    worst = -np.inf
    for _ in range(1000):
        d = int(rng.integers(1, 4))
        shape = tuple(int(k) for k in rng.integers(2, int(4096 ** (1 / d)) + 1, d))
        x = rng.standard_normal(shape)
        nexp = int(rng.integers(1, 4))
        us = rng.uniform(0, 1, (nexp, d))
        lam = rng.dirichlet(np.ones(nexp))
        theta = ExponentVector(tuple(lam @ us))
        lhs = mixed_norm(x, theta)
        rhs = math.prod(mixed_norm(x, ExponentVector(tuple(us[j]))) ** lam[j]
                        for j in range(nexp))
        worst = max(worst, lhs / rhs - 1.0)
        if lhs > rhs * (1 + 1e-9):
            failures += 1
    ok = failures == 0
    _report("C5", "interpolation inequality on 1000 tensors", ok,
            f"worst relative excess={worst:.3e}")


def test_c6_continuity_under_perturbation():
    failures = []
    worst_small = 0.0
    for seed in range(20):
        f = random_family(1_313_000 + seed)
        base = psi(f).log_psi
        diffs = [abs(psi(perturb(f, delta, seed=99)).log_psi - base)
                 for delta in (1e-2, 1e-4, 1e-6)]
        worst_small = max(worst_small, diffs[2])
        if not (diffs[1] <= diffs[0] and diffs[2] <= diffs[1] and diffs[2] < 1e-3):
            failures.append((seed, diffs))
    ok = not failures
    _report("C6", "continuity under perturbation on 20 families", ok,
            f"worst |dlog psi| at delta=1e-6: {worst_small:.3e}")


def test_c7_exponent_recovery_by_sweeps():
    cases = []
    # single infinity-ball: slope 1/2
    f1 = validate({"q": 2, "k": [4], "balls": [{"nu": 1, "p": ["inf"]}]})
    cases.append((f1, 0, [4, 8, 16, 32, 64, 128, 256], 0.5))
    # the golden pair: flat beyond the crossover
    f2 = validate(GOLDEN_RAW)
    cases.append((f2, 0, [8, 16, 32, 64, 128, 256], 0.0))
    # clamped exponent u > 1/q on the swept axis: flat
    f3 = validate({"q": 2, "k": [4, 4], "balls": [{"nu": 2, "p": [1, 4]}]})
    cases.append((f3, 0, [2, 4, 8, 16, 32], 0.0))
    ok = True
    details = []
    for f, axis, kvals, expected in cases:
        fit = fit_run(sweep_axis(f, axis, kvals), axis, f.q)
        good = (fit["slope"] is not None
                and abs(fit["slope"] - expected) <= 1e-6
                and abs(fit["expected_slope"] - expected) <= 1e-12
                and fit["slope_ok"])
        ok = ok and good
        details.append(f"{fit['slope']:.8f}~{expected}")
    _report("C7", "scaling-exponent recovery on 3 sweeps", ok,
            ", ".join(details))


def test_c8_replacement_vertex_property():
    rng = np.random.default_rng(88)
    failures = 0
    for _ in range(10_000):
        m = int(rng.integers(2, 6))
        ps, eta, a = make_replacement_trial(rng, m)
        i = replacement_vertex(ps, eta, a)
        replaced = PointSet(ps.points[:i] + (tuple(eta),) + ps.points[i + 1:])
        if not np.all(barycentric(replaced, a) >= -1e-10):
            failures += 1
    ok = failures == 0
    _report("C8", "replacement vertex on 10^4 trials", ok,
            f"failures={failures}")


def test_c9_byte_determinism_across_threads(tmp_path):
    cfg = tmp_path / "family.json"
    cfg.write_text(json.dumps(GOLDEN_RAW))

    def run(*args):
        proc = subprocess.run([sys.executable, "-m", "widthcalc", *args],
                              capture_output=True, check=True)
        return proc.stdout

    psi_outputs = {run("psi", str(cfg), "--threads", t)
                   for t in ("1", "1", "4")}
    check_outputs = {run("check", "--trials", "5", "--seed", "11",
                         "--threads", t)
                     for t in ("1", "1", "4")}
    ok = len(psi_outputs) == 1 and len(check_outputs) == 1
    _report("C9", "byte-identical psi and check outputs across runs and threads",
            ok)
