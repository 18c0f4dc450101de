"""Reciprocal exponents, the width monomial, and anisotropic mixed norms.

Exponent vectors are carried everywhere in reciprocal form ``u = 1/p`` with
``u_i`` in ``[0, 1]``; ``u_i = 0`` encodes ``p_i = inf``.  Every interpolation
formula used by this package is affine in ``u``, so the reciprocal form
eliminates infinities outright.

Products of powers (the width monomial, radius products, box norms) are
carried as sums of natural logarithms and exponentiated only at reporting
boundaries.  A "log value" is therefore a plain float throughout.

Axis-order convention, stated once and prominently because it is the classic
off-by-one trap for mixed norms: a tensor of shape ``(k_1, ..., k_d)`` is
aggregated starting at axis 0 with exponent ``p_1`` (the innermost index) and
ending at axis ``d-1`` with exponent ``p_d`` (the outermost index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# A natural logarithm of a positive quantity.  Kept as a plain float; the
# alias only documents intent in signatures.
LogValue = float


@dataclass(frozen=True)
class ExponentVector:
    """Reciprocal exponent vector ``u = (1/p_1, ..., 1/p_d)``.

    Entries must lie in ``[0, 1]``; a slack of 1e-9 is tolerated on input
    (interpolation can overshoot by rounding) and clamped exactly.
    """

    u: tuple[float, ...]

    def __post_init__(self):
        if len(self.u) == 0:
            raise ValueError("exponent vector must have dimension >= 1")
        vals = []
        for x in self.u:
            x = float(x)
            if not math.isfinite(x) or x < -1e-9 or x > 1.0 + 1e-9:
                raise ValueError(f"reciprocal exponent {x} outside [0, 1]")
            vals.append(min(1.0, max(0.0, x)))
        object.__setattr__(self, "u", tuple(vals))

    @classmethod
    def from_p(cls, p: Sequence) -> "ExponentVector":
        """Build from exponents ``p_i`` in ``[1, inf]``; the token "inf"
        (any case) or ``float('inf')`` maps to ``u_i = 0`` exactly."""
        u = []
        for entry in p:
            if isinstance(entry, str):
                if entry.strip().lower() == "inf":
                    u.append(0.0)
                    continue
                raise ValueError(f"unrecognized exponent token {entry!r}")
            val = float(entry)
            if math.isinf(val) and val > 0:
                u.append(0.0)
            elif val >= 1.0:
                u.append(1.0 / val)
            else:
                raise ValueError(f"exponent p={val} outside [1, inf]")
        return cls(tuple(u))

    @property
    def d(self) -> int:
        return len(self.u)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.u, dtype=float)

    def p_values(self) -> list:
        """Exponents ``p_i`` for display; 0 maps back to the string "inf"."""
        return ["inf" if x == 0.0 else 1.0 / x for x in self.u]


@dataclass(frozen=True)
class GridShape:
    """Grid side lengths ``(k_1, ..., k_d)``, all >= 1."""

    k: tuple[int, ...]

    def __post_init__(self):
        if len(self.k) == 0:
            raise ValueError("grid shape must have dimension >= 1")
        ks = []
        for x in self.k:
            if isinstance(x, bool) or int(x) != x or int(x) < 1:
                raise ValueError(f"grid side {x!r} must be a positive integer")
            ks.append(int(x))
        object.__setattr__(self, "k", tuple(ks))

    @property
    def d(self) -> int:
        return len(self.k)

    @property
    def kprod(self) -> int:
        return math.prod(self.k)

    def log_k(self) -> np.ndarray:
        return np.log(np.asarray(self.k, dtype=float))


@dataclass(frozen=True)
class QParam:
    """Target exponent ``q`` in ``[1, 2]`` with its reciprocal ``uq = 1/q``."""

    q: float

    def __post_init__(self):
        q = float(self.q)
        if not (1.0 <= q <= 2.0):
            raise ValueError(f"q={q} out of range [1, 2]")
        object.__setattr__(self, "q", q)

    @property
    def uq(self) -> float:
        return 1.0 / self.q


def phi(u: ExponentVector, ks: GridShape, q: QParam) -> LogValue:
    """Log of the width monomial: ``sum_j max(0, 1/q - u_j) * log k_j``.

    This is the order of the width of a single ball with exponents ``u`` on
    the grid ``ks``; it is convex, piecewise linear, and nonincreasing in
    each ``u_j``.
    """
    if u.d != ks.d:
        raise ValueError(f"dimension mismatch: u has d={u.d}, grid has d={ks.d}")
    uq = q.uq
    return float(np.dot(np.maximum(0.0, uq - u.as_array()), ks.log_k()))


def _aggregate_axis0(y: np.ndarray, ui: float) -> np.ndarray:
    """l_p reduction of axis 0 with p = 1/ui (max for ui = 0), scale-invariant.

    The max of each fiber is factored out so that huge p (tiny ui) neither
    overflows nor underflows: ratios lie in [0, 1], their p-th powers sum to
    something in [1, k], and only that sum is raised to the small power ui.
    """
    if ui == 0.0:
        return y.max(axis=0)
    m = y.max(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(m > 0.0, y / np.where(m > 0.0, m, 1.0), 0.0)
    s = np.power(r, 1.0 / ui).sum(axis=0)
    return m * np.power(s, ui)


def mixed_norm(x, u: ExponentVector) -> float:
    """Anisotropic norm of a dense tensor, axis 0 innermost.

    Axis 0 is aggregated first with exponent ``p_1 = 1/u_1``, then the new
    axis 0 (originally index 2) with ``p_2``, and so on outward to ``p_d``.
    ``u_i = 0`` means max-aggregation along that axis.

    Intended for validation at desk scale (kprod up to ~1e6); certificate
    math never materializes tensors.
    """
    y = np.abs(np.asarray(x, dtype=float))
    if y.ndim != u.d:
        raise ValueError(f"shape mismatch: tensor has {y.ndim} axes, u has d={u.d}")
    for ui in u.u:
        y = _aggregate_axis0(np.atleast_1d(y), ui)
    return float(y)


def box_norm(s: Sequence[float], u: ExponentVector) -> LogValue:
    """Log norm of the indicator of an ``s_1 x ... x s_d`` box: ``sum u_i log s_i``.

    For integer ``s`` this equals ``log(mixed_norm(indicator, u))`` exactly
    in exact arithmetic.  Real-valued ``s >= 1`` is accepted because every
    certificate identity downstream is exact for real box sides.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 1 or len(s) != u.d:
        raise ValueError(f"shape mismatch: s has {s.shape}, u has d={u.d}")
    if np.any(s < 1.0 - 1e-12):
        raise ValueError(f"box sides {s.tolist()} out of range (need s_i >= 1)")
    return float(np.dot(u.as_array(), np.log(np.maximum(s, 1.0))))


def indicator_box(s: Sequence[int], ks: GridShape) -> np.ndarray:
    """Dense 0/1 tensor of shape ``ks.k`` with ones on the leading s-box."""
    s = [int(v) for v in s]
    if len(s) != ks.d:
        raise ValueError("box/grid dimension mismatch")
    for si, ki in zip(s, ks.k):
        if not (1 <= si <= ki):
            raise ValueError(f"box side {si} out of range [1, {ki}]")
    x = np.zeros(ks.k, dtype=float)
    x[tuple(slice(0, si) for si in s)] = 1.0
    return x
