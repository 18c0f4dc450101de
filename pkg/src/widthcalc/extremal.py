"""Extremal witness vectors: scaled box indicators realizing the estimate.

Given the argmin certificate, a box shape s is solved so that the scaled
indicator of the s-box lies in the intersection of all balls while its
l_q norm equals the certificate value.  Box sides are kept as positive
reals: every identity below is exact for real s, and the integer box the
construction classically uses is recovered by flooring on demand (cost: a
bounded constant factor, which an order estimate absorbs).

All norms, scales, and margins live in the log domain.  The margin sign
convention is margin = log nu_beta - log ||w||_beta, so membership in ball
beta means margin >= -tol.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .certificates import Certificate
from .exponents import ExponentVector, GridShape, box_norm, indicator_box, mixed_norm
from .family import BallFamily


class GeneralPositionError(RuntimeError):
    """A coordinate off the active set has interpolated exponent equal to q;
    the witness construction requires a perturbation first."""


class WitnessRangeError(RuntimeError):
    """Solved box sides left [1, k_i] beyond tolerance, which the theory
    rules out in general position; indicates degeneracy or a bug."""


@dataclass(frozen=True)
class ExtremalWitness:
    """Box shape, scale, and closed-form norms of the witness vector."""

    s: tuple[float, ...]
    log_scale: float
    log_norms: dict          # ball label -> log of witness norm in that ball
    log_margins: dict        # ball label -> log nu - log norm
    log_q_norm: float
    cert: Certificate

    def worst_margin(self) -> tuple[str, float]:
        label = min(self.log_margins, key=lambda b: self.log_margins[b])
        return label, self.log_margins[label]

    def to_dict(self) -> dict:
        return {
            "s": list(self.s),
            "log_scale": self.log_scale,
            "log_norms": dict(self.log_norms),
            "margins": dict(self.log_margins),
            "log_q_norm": self.log_q_norm,
            "certificate": self.cert.to_dict(),
        }


@dataclass(frozen=True)
class MembershipReport:
    ok: bool
    worst_label: str
    worst_margin: float
    margins: dict
    dense: Optional[dict] = None   # populated when the dense cross-check ran

    def to_dict(self) -> dict:
        out = {"ok": self.ok, "worst_label": self.worst_label,
               "worst_margin": self.worst_margin, "margins": dict(self.margins)}
        if self.dense is not None:
            out["dense"] = dict(self.dense)
        return out


def partition_coordinates(cert: Certificate, q, tol: float = 1e-10,
                          ) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Split {0..d-1} into the active set I and the off-sets T_plus/T_minus.

    T_plus holds coordinates where the interpolated exponent exceeds q
    (reciprocal below 1/q), T_minus where it falls short.  A coordinate off
    I within tol of 1/q is a general-position failure and raises.
    For m = 1 the active set is empty and T_plus plays the role of the set
    of coordinates with p_i > q.
    """
    uq = q.uq
    t_plus, t_minus = [], []
    for i, ui in enumerate(cert.theta_u.u):
        if i in cert.I:
            continue
        if abs(ui - uq) <= tol:
            raise GeneralPositionError(
                f"coordinate {i + 1}: interpolated exponent equals q within "
                f"tol={tol:g}; not in general position; perturb first")
        (t_plus if ui < uq else t_minus).append(i)
    return cert.I, tuple(t_plus), tuple(t_minus)


def solve_sbar(f: BallFamily, cert: Certificate, tol: float = 1e-10) -> np.ndarray:
    """Box sides: k_i on T_plus, 1 on T_minus, and on I the solution of the
    radius-matching system

        sum_{i in I} (u_{alpha_j,i} - u_{alpha_1,i}) log s_i
            = log(nu_j / nu_1) - sum_{i in T_plus} (u_{alpha_j,i} - u_{alpha_1,i}) log k_i

    for j = 2..m.  General position makes the system nonsingular and keeps
    every solved side inside [1, k_i]; leaving that range beyond 1e-9
    relative is a hard error.
    """
    I, t_plus, _ = partition_coordinates(cert, f.q, tol)
    log_k = f.ks.log_k()
    s = np.ones(f.d)
    for i in t_plus:
        s[i] = f.ks.k[i]

    if cert.m >= 2 and I:
        um = f.u_matrix()
        idx = [f.labels.index(lab) for lab in cert.labels]
        log_nus = f.log_nus()
        I_list = list(I)
        tp_list = list(t_plus)
        du = um[idx[1:]] - um[idx[0]]           # (m-1, d)
        mat = du[:, I_list]
        rhs = log_nus[idx[1:]] - log_nus[idx[0]]
        if tp_list:
            rhs = rhs - du[:, tp_list] @ log_k[tp_list]
        try:
            log_s = np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError as exc:
            raise WitnessRangeError(
                f"box system singular for certificate {cert.cert_id}: {exc}") from exc
        s[I_list] = np.exp(log_s)

    for i in range(f.d):
        ki = f.ks.k[i]
        if s[i] < 1.0 - 1e-9 or s[i] > ki * (1.0 + 1e-9):
            raise WitnessRangeError(
                f"box side s_{i + 1}={s[i]!r} outside [1, {ki}] for certificate "
                f"{cert.cert_id}; family is degenerate or not in general position")
    return s


def build_witness(f: BallFamily, cert: Certificate, s: np.ndarray) -> ExtremalWitness:
    """Assemble the witness: scale, per-ball norms, margins, and q-norm.

    The scale is the radius product divided by the box norm under the
    interpolated exponents, so the witness saturates every ball in the
    generating tuple exactly and its l_q norm reproduces the certificate
    value: on T_plus the side k_i contributes (1/q - 1/theta_i) log k_i,
    on T_minus the side 1 contributes nothing, and on I the exponent gap
    vanishes.
    """
    s = np.asarray(s, dtype=float)
    log_s = np.log(np.maximum(s, 1e-300))
    idx = [f.labels.index(lab) for lab in cert.labels]
    log_nus = f.log_nus()
    radius_part = float(np.dot(cert.lam, log_nus[idx]))
    log_scale = radius_part - float(np.dot(cert.theta_u.as_array(), log_s))

    log_norms, log_margins = {}, {}
    for b in f.balls:
        ln = log_scale + box_norm(s, b.u)
        log_norms[b.label] = ln
        log_margins[b.label] = b.log_nu - ln
    log_q_norm = log_scale + f.q.uq * float(log_s.sum())
    return ExtremalWitness(
        s=tuple(float(x) for x in s),
        log_scale=log_scale,
        log_norms=log_norms,
        log_margins=log_margins,
        log_q_norm=log_q_norm,
        cert=cert,
    )


def dense_tensor(w: ExtremalWitness, ks: GridShape) -> np.ndarray:
    """Materialize the witness at integer box sides floor(s), desk scale
    only.  Index 1 is axis 0 (innermost), matching the mixed-norm module."""
    if ks.kprod > 4096:
        raise ValueError(f"dense witness limited to kprod <= 4096, got {ks.kprod}")
    s_int = [min(k, max(1, int(np.floor(si + 1e-9)))) for si, k in zip(w.s, ks.k)]
    return float(np.exp(w.log_scale)) * indicator_box(s_int, ks)


def dense_tensor_bytes(w: ExtremalWitness, ks: GridShape) -> bytes:
    """Flat binary dump: 8-byte little-endian reals, index 1 fastest-varying
    (column-major order over the shape (k_1, ..., k_d))."""
    return dense_tensor(w, ks).astype("<f8").tobytes(order="F")


def verify_membership(w: ExtremalWitness, f: BallFamily, tol: float = 1e-9,
                      dense: bool = False) -> MembershipReport:
    """Recompute every margin from the box shape and family, and check the
    witness lies in every ball (margin >= -tol).

    With dense=True (and kprod <= 4096) the closed-form box norms are
    cross-checked against recursive mixed norms of the materialized tensor
    at the floored integer sides; the report carries the worst deviation.
    """
    s = np.asarray(w.s, dtype=float)
    margins = {}
    for b in f.balls:
        margins[b.label] = b.log_nu - (w.log_scale + box_norm(s, b.u))
    worst_label = min(margins, key=lambda lab: margins[lab])
    worst = margins[worst_label]
    ok = worst >= -tol

    dense_info = None
    if dense:
        x = dense_tensor(w, f.ks)
        s_int = np.array([min(k, max(1, int(np.floor(si + 1e-9))))
                          for si, k in zip(w.s, f.ks.k)], dtype=float)
        max_dev = 0.0
        for b in f.balls:
            closed = w.log_scale + box_norm(s_int, b.u)
            measured = float(np.log(mixed_norm(x, b.u)))
            max_dev = max(max_dev, abs(measured - closed))
        q_closed = w.log_scale + f.q.uq * float(np.log(s_int).sum())
        q_measured = float(np.log(mixed_norm(x, ExponentVector((f.q.uq,) * f.d))))
        max_dev = max(max_dev, abs(q_measured - q_closed))
        dense_info = {"max_log_deviation": max_dev, "ok": max_dev <= tol,
                      "s_int": [int(v) for v in s_int]}
        ok = ok and dense_info["ok"]

    return MembershipReport(ok=ok, worst_label=worst_label, worst_margin=worst,
                            margins=margins, dense=dense_info)
