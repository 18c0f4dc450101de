"""Randomized verification harness: seeded family generation plus the full
invariant suite (oracle equality, witness membership, witness-value
identity, interpolation inequality).

Everything is deterministic in the seed; the ``check`` CLI command and the
test suite both run through here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificates import psi
from .exponents import ExponentVector, GridShape, QParam, mixed_norm
from .extremal import build_witness, solve_sbar, verify_membership
from .family import BallFamily, BallSpec, perturb
from .oracle import compare, minimize

ORACLE_TOL = 1e-6
WITNESS_TOL = 1e-9
INTERP_SLACK = 1e-9


@dataclass(frozen=True)
class TrialBounds:
    """Size bounds for random families."""

    min_balls: int = 1
    max_balls: int = 4
    min_dim: int = 1
    max_dim: int = 3
    q_choices: tuple[float, ...] = (1.0, 1.5, 2.0)
    k_min: int = 2
    k_max: int = 64
    log_nu_low: float = -2.0
    log_nu_high: float = 2.0
    perturb_delta: float = 1e-4

    def to_dict(self) -> dict:
        return {"min_balls": self.min_balls, "max_balls": self.max_balls,
                "min_dim": self.min_dim, "max_dim": self.max_dim,
                "q_choices": list(self.q_choices),
                "k_min": self.k_min, "k_max": self.k_max,
                "log_nu_low": self.log_nu_low, "log_nu_high": self.log_nu_high,
                "perturb_delta": self.perturb_delta}

    @classmethod
    def from_dict(cls, raw: dict) -> "TrialBounds":
        known = {f: raw[f] for f in cls.__dataclass_fields__ if f in raw}
        if "q_choices" in known:
            known["q_choices"] = tuple(float(x) for x in known["q_choices"])
        return cls(**known)


def random_family(seed: int, bounds: TrialBounds = TrialBounds()) -> BallFamily:
    """Random family in general position: uniform reciprocal exponents,
    log-uniform radii, then a perturbation pass that guarantees general
    position at tolerance perturb_delta/10."""
    rng = np.random.default_rng([int(seed) & 0x7FFFFFFF, 0xFA])
    d = int(rng.integers(bounds.min_dim, bounds.max_dim + 1))
    nballs = int(rng.integers(bounds.min_balls, bounds.max_balls + 1))
    q = QParam(bounds.q_choices[int(rng.integers(len(bounds.q_choices)))])
    ks = GridShape(tuple(int(x) for x in
                         rng.integers(bounds.k_min, bounds.k_max + 1, size=d)))
    balls = []
    for j in range(nballs):
        u = ExponentVector(tuple(float(x) for x in rng.uniform(0.0, 1.0, size=d)))
        nu = float(np.exp(rng.uniform(bounds.log_nu_low, bounds.log_nu_high)))
        balls.append(BallSpec(label=f"b{j}", nu=nu, u=u))
    raw = BallFamily(balls=tuple(balls), ks=ks, q=q)
    return perturb(raw, bounds.perturb_delta, seed=seed)


def random_desk_shape(rng: np.random.Generator, d: int,
                      kprod_cap: int = 4096) -> GridShape:
    """Small random shape with kprod below the dense-verification cap."""
    side_cap = max(2, int(kprod_cap ** (1.0 / d)))
    return GridShape(tuple(int(x) for x in rng.integers(2, side_cap + 1, size=d)))


def interpolation_trial(rng: np.random.Generator, f: BallFamily) -> dict:
    """One interpolation-inequality trial on a random dense tensor:
    the norm at the interpolated exponents must not exceed the weighted
    geometric mean of the endpoint norms (within relative slack 1e-9)."""
    ks = f.ks if f.ks.kprod <= 4096 else random_desk_shape(rng, f.d)
    x = rng.standard_normal(ks.k)
    lam = rng.dirichlet(np.ones(f.size))
    theta = ExponentVector(tuple(float(v) for v in lam @ f.u_matrix()))
    left = math.log(mixed_norm(x, theta))
    right = float(sum(l * math.log(mixed_norm(x, b.u))
                      for l, b in zip(lam, f.balls)))
    ok = left <= right + math.log1p(INTERP_SLACK)
    return {"ok": bool(ok), "excess": left - right}


def run_trial(seed: int, bounds: TrialBounds = TrialBounds()) -> dict:
    """Generate one family and run the four invariants.  Returns a record
    with per-invariant outcomes and enough detail to reproduce failures."""
    f = random_family(seed, bounds)
    rng = np.random.default_rng([int(seed) & 0x7FFFFFFF, 0x1E57])

    ps = psi(f)
    orc = minimize(f)
    verdict = compare(ps, orc, tol=ORACLE_TOL)

    s = solve_sbar(f, ps.best)
    w = build_witness(f, ps.best, s)
    membership = verify_membership(w, f, tol=WITNESS_TOL)
    value_gap = abs(w.log_q_norm - ps.log_psi)
    interp = interpolation_trial(rng, f)

    record = {
        "seed": int(seed),
        "family": {"balls": f.size, "d": f.d, "q": f.q.q, "k": list(f.ks.k)},
        "oracle_equality": {"ok": bool(verdict.passed), "gap": verdict.gap,
                            "mode": orc.mode},
        "witness_membership": {"ok": bool(membership.ok),
                               "worst_margin": membership.worst_margin},
        "witness_value": {"ok": bool(value_gap <= WITNESS_TOL), "gap": value_gap},
        "interpolation": interp,
    }
    record["ok"] = all(record[k]["ok"] for k in
                       ("oracle_equality", "witness_membership",
                        "witness_value", "interpolation"))
    return record


def run_suite(trials: int, seed: int, bounds: TrialBounds = TrialBounds(),
              ) -> dict:
    """Run ``trials`` seeded trials; summary is byte-stable for fixed
    arguments.  Failing trial records are kept verbatim in the summary."""
    invariant_names = ("oracle_equality", "witness_membership",
                       "witness_value", "interpolation")
    counts = {name: {"pass": 0, "fail": 0} for name in invariant_names}
    failures = []
    passed = 0
    for t in range(trials):
        record = run_trial(seed * 1_000_003 + t, bounds)
        for name in invariant_names:
            counts[name]["pass" if record[name]["ok"] else "fail"] += 1
        if record["ok"]:
            passed += 1
        else:
            failures.append(record)
    return {
        "trials": trials,
        "seed": seed,
        "bounds": bounds.to_dict(),
        "passed": passed,
        "failed": trials - passed,
        "invariants": counts,
        "failures": failures,
        "ok": not failures,
    }
