"""Finite families of weighted anisotropic balls: parsing, validation,
general-position checking, and perturbation.

The JSON ingestion schema (the single input format of the CLI):

    {"q": number, "n": optional integer, "k": [int, ...],
     "balls": [{"label": string, "nu": number, "p": [number|"inf", ...]}]}

``p`` entries are numbers >= 1 or the token "inf" (case-insensitive).
Serialized families additionally carry a "u" list per ball (the exact
reciprocal exponents); when present it takes precedence over "p" so that
validate(serialize(validate(x))) reproduces the family bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exponents import ExponentVector, GridShape, QParam
from .geometry import PointSet, affinely_independent


class FamilyError(ValueError):
    """Structured validation failure of a family description."""


class PerturbationError(RuntimeError):
    """Perturbation failed to reach general position within the retry budget."""


@dataclass(frozen=True)
class BallSpec:
    """One ball: radius nu > 0 and reciprocal exponent vector u."""

    label: str
    nu: float
    u: ExponentVector

    def __post_init__(self):
        nu = float(self.nu)
        if not math.isfinite(nu) or nu <= 0.0:
            raise FamilyError(f"ball {self.label!r}: radius nu={nu} must be positive")
        object.__setattr__(self, "nu", nu)

    @property
    def log_nu(self) -> float:
        return math.log(self.nu)


@dataclass(frozen=True)
class BallFamily:
    """Validated family: balls, grid shape, target exponent, optional width
    index n (informational), and validation warnings.

    Immutable after construction; safe to share across threads.
    """

    balls: tuple[BallSpec, ...]
    ks: GridShape
    q: QParam
    n: Optional[int] = None
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if len(self.balls) == 0:
            raise FamilyError("family must contain at least one ball")
        d = self.ks.d
        for b in self.balls:
            if b.u.d != d:
                raise FamilyError(
                    f"ball {b.label!r} has dimension {b.u.d}, grid has {d}")
        labels = [b.label for b in self.balls]
        if len(set(labels)) != len(labels):
            raise FamilyError(f"duplicate ball labels in {labels}")

    @property
    def d(self) -> int:
        return self.ks.d

    @property
    def size(self) -> int:
        return len(self.balls)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(b.label for b in self.balls)

    def u_matrix(self) -> np.ndarray:
        """Shape (size, d): row per ball, reciprocal exponents."""
        return np.asarray([b.u.u for b in self.balls], dtype=float)

    def log_nus(self) -> np.ndarray:
        return np.asarray([b.log_nu for b in self.balls], dtype=float)

    def with_balls(self, balls: Sequence[BallSpec]) -> "BallFamily":
        return BallFamily(balls=tuple(balls), ks=self.ks, q=self.q, n=self.n,
                          warnings=self.warnings)


@dataclass(frozen=True)
class Violation:
    kind: str                      # "affine_dependence" | "theta_equals_q"
    labels: tuple[str, ...]
    I: tuple[int, ...]             # 1-based coordinates for reporting
    detail: str


@dataclass(frozen=True)
class GeneralPositionReport:
    ok: bool
    violations: tuple[Violation, ...]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [
                {"kind": v.kind, "balls": list(v.labels), "I": list(v.I),
                 "detail": v.detail}
                for v in self.violations
            ],
        }


def validate(raw: dict) -> BallFamily:
    """Validate a raw family description (parsed JSON) into a BallFamily.

    Raises FamilyError on structural problems; soft findings (duplicate
    exponent vectors, n outside the supported width regime) become warnings.
    """
    if not isinstance(raw, dict):
        raise FamilyError(f"family description must be an object, got {type(raw).__name__}")
    if "q" not in raw:
        raise FamilyError("missing required field 'q'")
    try:
        q = QParam(float(raw["q"]))
    except (TypeError, ValueError) as exc:
        raise FamilyError(f"q out of range: {exc}") from exc

    if "k" not in raw or not isinstance(raw["k"], (list, tuple)) or len(raw["k"]) == 0:
        raise FamilyError("missing or empty field 'k' (grid shape)")
    try:
        ks = GridShape(tuple(raw["k"]))
    except ValueError as exc:
        raise FamilyError(f"bad grid shape: {exc}") from exc

    n = raw.get("n")
    warnings: list[str] = []
    if n is not None:
        if isinstance(n, bool) or int(n) != n or int(n) < 0:
            raise FamilyError(f"width index n={n!r} must be a nonnegative integer")
        n = int(n)
        if n > ks.kprod / 2:
            warnings.append(
                f"n={n} exceeds kprod/2={ks.kprod / 2:g}; the width estimate "
                "is stated for n <= kprod/2")

    balls_raw = raw.get("balls")
    if not isinstance(balls_raw, (list, tuple)) or len(balls_raw) == 0:
        raise FamilyError("field 'balls' must be a nonempty list")

    balls: list[BallSpec] = []
    for idx, b in enumerate(balls_raw):
        if not isinstance(b, dict):
            raise FamilyError(f"ball #{idx} must be an object")
        label = b.get("label", f"b{idx}")
        if not isinstance(label, str) or not label:
            raise FamilyError(f"ball #{idx}: label must be a nonempty string")
        if "nu" not in b:
            raise FamilyError(f"ball {label!r}: missing radius 'nu'")
        nu = b["nu"]
        if "u" in b:
            uvals = b["u"]
            if not isinstance(uvals, (list, tuple)) or len(uvals) != ks.d:
                raise FamilyError(f"ball {label!r}: 'u' must list {ks.d} reciprocals")
            try:
                u = ExponentVector(tuple(float(x) for x in uvals))
            except (TypeError, ValueError) as exc:
                raise FamilyError(f"ball {label!r}: {exc}") from exc
        else:
            pvals = b.get("p")
            if not isinstance(pvals, (list, tuple)) or len(pvals) != ks.d:
                raise FamilyError(f"ball {label!r}: 'p' must list {ks.d} exponents")
            try:
                u = ExponentVector.from_p(pvals)
            except (TypeError, ValueError) as exc:
                raise FamilyError(f"ball {label!r}: {exc}") from exc
        try:
            balls.append(BallSpec(label=label, nu=float(nu), u=u))
        except (TypeError, ValueError) as exc:
            raise FamilyError(f"ball {label!r}: {exc}") from exc

    seen: dict[tuple[float, ...], str] = {}
    for b in balls:
        if b.u.u in seen:
            warnings.append(
                f"balls {seen[b.u.u]!r} and {b.label!r} share the same exponent "
                "vector; tuples containing both are skipped during enumeration")
        else:
            seen[b.u.u] = b.label

    return BallFamily(balls=tuple(balls), ks=ks, q=q, n=n, warnings=tuple(warnings))


def serialize(f: BallFamily) -> dict:
    """Inverse of validate up to representation.  Emits both display
    exponents "p" and exact reciprocals "u" so the round trip is lossless."""
    out: dict = {"q": f.q.q, "k": list(f.ks.k)}
    if f.n is not None:
        out["n"] = f.n
    out["balls"] = [
        {"label": b.label, "nu": b.nu, "p": b.u.p_values(), "u": list(b.u.u)}
        for b in f.balls
    ]
    return out


def check_general_position(f: BallFamily, tol: float = 1e-10) -> GeneralPositionReport:
    """Both general-position conditions, checked exhaustively.

    Condition 1: for every m in {2..d+1}, every coordinate set I of size
    m-1 and every m-subset of balls, the projections of the reciprocal
    exponent vectors to I are affinely independent (complete-pivot test).

    Condition 2: for every certificate the family admits, the interpolated
    reciprocal exponent stays tol-away from 1/q outside the active set; for
    single-ball certificates this means every u_{alpha,i} differs from 1/q.
    """
    from itertools import combinations

    from .certificates import enumerate_certificates

    if tol <= 0:
        raise ValueError("tol must be positive")
    violations: list[Violation] = []
    um = f.u_matrix()
    labels = f.labels
    d = f.d

    for m in range(2, min(d + 1, f.size) + 1):
        for subset in combinations(range(f.size), m):
            for I in combinations(range(d), m - 1):
                pts = PointSet(tuple(tuple(um[j, list(I)]) for j in subset))
                if not affinely_independent(pts, tol):
                    violations.append(Violation(
                        kind="affine_dependence",
                        labels=tuple(labels[j] for j in subset),
                        I=tuple(i + 1 for i in I),
                        detail=f"projections to I are affinely dependent (tol={tol:g})"))

    uq = f.q.uq
    enum = enumerate_certificates(f, tol_rank=tol)
    for cert in enum.certificates:
        for i in range(d):
            if i in cert.I:
                continue
            gap = abs(cert.theta_u.u[i] - uq)
            if gap <= tol:
                violations.append(Violation(
                    kind="theta_equals_q",
                    labels=cert.labels,
                    I=tuple(j + 1 for j in cert.I),
                    detail=f"interpolated exponent matches q at coordinate {i + 1} "
                           f"(|1/theta - 1/q| = {gap:.3e} <= tol {tol:g})"))

    return GeneralPositionReport(ok=not violations, violations=tuple(violations))


def perturb(f: BallFamily, delta: float, seed: int,
            max_attempts: int = 64) -> BallFamily:
    """Perturb every reciprocal exponent by at most delta, clamped to [0, 1],
    retrying sub-seeds until the result passes check_general_position at
    tolerance delta/10.

    Deterministic in (f, delta, seed).  The unit noise depends only on the
    seed and attempt, so shrinking delta with a fixed seed rescales the same
    perturbation direction; delta = 0 returns the family unchanged.
    """
    if delta == 0.0:
        return f
    if not (0.0 < delta < 0.5):
        raise ValueError(f"delta={delta} out of range (0, 1/2)")
    for attempt in range(max_attempts):
        rng = np.random.default_rng([int(seed) & 0x7FFFFFFF, attempt, 0x7E27])
        balls = []
        for b in f.balls:
            eps = rng.uniform(-1.0, 1.0, size=b.u.d)
            u = np.clip(b.u.as_array() + delta * eps, 0.0, 1.0)
            balls.append(BallSpec(label=b.label, nu=b.nu,
                                  u=ExponentVector(tuple(float(x) for x in u))))
        candidate = f.with_balls(balls)
        if check_general_position(candidate, tol=delta / 10.0).ok:
            return candidate
    raise PerturbationError(
        f"failed to reach general position after {max_attempts} attempts "
        f"(delta={delta:g}, seed={seed})")
