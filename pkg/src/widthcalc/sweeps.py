"""Grid-size sweeps and scaling-exponent recovery.

Sweeping one grid axis while everything else is held fixed makes the
estimate a pure power law in k_i as long as the argmin certificate stays
put: log Psi = const + max(0, 1/q - 1/theta_i) log k_i.  The fit over the
longest stable run of the sweep therefore recovers that exponent, which is
a strong end-to-end consistency check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .certificates import Certificate, psi
from .exponents import GridShape
from .family import BallFamily

SLOPE_TOL = 1e-6


@dataclass(frozen=True)
class SweepRow:
    k: int
    log_psi: float
    cert: Certificate


def sweep_axis(f: BallFamily, axis: int, kvalues: Sequence[int],
               cap: Optional[int] = None, threads: int = 1) -> list[SweepRow]:
    """Recompute the estimate for each value of k_axis (axis 0-based)."""
    if not (0 <= axis < f.d):
        raise ValueError(f"axis {axis + 1} out of range 1..{f.d}")
    kvals = [int(k) for k in kvalues]
    if not kvals or any(k < 1 for k in kvals) or sorted(kvals) != kvals:
        raise ValueError("kvalues must be a nondecreasing list of positive integers")
    rows = []
    for k in kvals:
        ks = list(f.ks.k)
        ks[axis] = k
        fam = BallFamily(balls=f.balls, ks=GridShape(tuple(ks)), q=f.q, n=f.n,
                         warnings=f.warnings)
        kwargs = {"threads": threads}
        if cap is not None:
            kwargs["cap"] = cap
        res = psi(fam, **kwargs)
        rows.append(SweepRow(k=k, log_psi=res.log_psi, cert=res.best))
    return rows


def longest_stable_run(rows: Sequence[SweepRow]) -> tuple[int, int]:
    """(start, length) of the longest consecutive run sharing a certificate
    id; the earliest run wins ties."""
    best_start, best_len = 0, 0
    start = 0
    for i in range(len(rows) + 1):
        if i == len(rows) or (i > start and rows[i].cert.cert_id != rows[start].cert.cert_id):
            if i - start > best_len:
                best_start, best_len = start, i - start
            start = i
    return best_start, best_len


def fit_run(rows: Sequence[SweepRow], axis: int, q) -> dict:
    """Least-squares slope of log Psi versus log k_axis over the longest
    stable run, compared against the certificate's predicted exponent."""
    start, length = longest_stable_run(rows)
    run = rows[start:start + length]
    cert = run[0].cert
    expected = max(0.0, q.uq - cert.theta_u.u[axis])
    out = {
        "axis": axis + 1,
        "certificate_id": cert.cert_id,
        "run_start_row": start,
        "run_length": length,
        "expected_slope": expected,
    }
    if length < 2:
        out.update({"slope": None, "abs_error": None, "slope_ok": None})
        return out
    x = np.log([r.k for r in run])
    y = np.asarray([r.log_psi for r in run])
    xc = x - x.mean()
    slope = float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
    out.update({"slope": slope, "abs_error": abs(slope - expected),
                "slope_ok": abs(slope - expected) <= SLOPE_TOL})
    return out
