"""Affine predicates and barycentric computations in exponent space.

Point sets here are tiny (m <= d+1 points in R^(m-1), with d <= ~8), so the
rank decisions use Gaussian elimination with complete pivoting: cheap,
deterministic, and reproducible across runs, which matters for certificate
output.  Full SVD is reserved for the test suite as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class SingularSystemError(ValueError):
    """Raised when a barycentric system is numerically singular."""


class ReplacementError(RuntimeError):
    """Raised when no replacement vertex exists: the hypothesis (interior
    query point, affinely independent replacements) was violated."""


@dataclass(frozen=True)
class PointSet:
    """m points in R^(m-1): projections of exponent vectors to a coordinate
    set of size m-1.  For m = 1 the single point lives in R^0."""

    points: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.points) == 0:
            raise ValueError("point set must be nonempty")
        pts = tuple(tuple(float(x) for x in p) for p in self.points)
        dims = {len(p) for p in pts}
        if len(dims) != 1:
            raise ValueError("points must share a dimension")
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(self.m, -1)


def _min_complete_pivot(a: np.ndarray) -> float:
    """Smallest pivot magnitude of Gaussian elimination with complete
    pivoting on the square matrix ``a``; 0.0 signals early breakdown."""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if n == 0:
        return np.inf
    smallest = np.inf
    for step in range(n):
        sub = np.abs(a[step:, step:])
        idx = np.unravel_index(np.argmax(sub), sub.shape)
        piv = sub[idx]
        if piv == 0.0:
            return 0.0
        smallest = min(smallest, float(piv))
        r, c = idx[0] + step, idx[1] + step
        a[[step, r], :] = a[[r, step], :]
        a[:, [step, c]] = a[:, [c, step]]
        a[step + 1:, :] -= np.outer(a[step + 1:, step] / a[step, step], a[step, :])
    return smallest


def affinely_independent(ps: PointSet, tol: float = 1e-10) -> bool:
    """True iff the difference matrix (xi_j - xi_1, j = 2..m) survives
    complete-pivoting elimination with every pivot magnitude > tol.

    A single point (m = 1) is affinely independent by convention.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    pts = ps.as_array()
    m = ps.m
    if m == 1:
        return True
    if pts.shape[1] != m - 1:
        raise ValueError(f"{m} points need ambient dimension {m - 1}, got {pts.shape[1]}")
    diffs = pts[1:] - pts[0]
    return _min_complete_pivot(diffs) > tol


def barycentric(ps: PointSet, a: Sequence[float]) -> np.ndarray:
    """Weights w with sum(w) = 1 and sum_j w_j xi_j = a.

    Solved by dense elimination with partial pivoting on the (m x m) system
    stacking the point coordinates over the all-ones row.
    """
    pts = ps.as_array()
    m = ps.m
    a = np.asarray(a, dtype=float).reshape(-1)
    if len(a) != pts.shape[1]:
        raise ValueError(f"query point has dimension {len(a)}, points have {pts.shape[1]}")
    mat = np.vstack([pts.T, np.ones((1, m))])
    rhs = np.concatenate([a, [1.0]])
    try:
        w = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"affinely dependent points: {exc}") from exc
    residual = np.abs(mat @ w - rhs).max()
    if not np.isfinite(residual) or residual > 1e-10 * (1.0 + float(np.abs(a).max(initial=0.0))):
        raise SingularSystemError(f"barycentric solve residual {residual} too large")
    return w


def replacement_vertex(ps: PointSet, eta: Sequence[float], a: Sequence[float],
                       tol: float = 1e-10) -> int:
    """Index i (0-based) such that replacing points[i] by eta keeps the query
    point a inside the convex hull.

    Requires a strictly interior to conv(ps) and, for each candidate i, the
    replaced set affinely independent.  Existence of a valid i is guaranteed
    under those hypotheses, so a first-success scan over i = 0..m-1 suffices.
    """
    w0 = barycentric(ps, a)
    if np.any(w0 <= tol):
        raise ReplacementError("query point is not strictly interior to conv(points)")
    eta = tuple(float(x) for x in eta)
    for i in range(ps.m):
        replaced = PointSet(ps.points[:i] + (eta,) + ps.points[i + 1:])
        if not affinely_independent(replaced, tol):
            raise ReplacementError(f"replacing point {i} by eta breaks affine independence")
        try:
            w = barycentric(replaced, a)
        except SingularSystemError:
            raise ReplacementError(f"replacing point {i} by eta breaks affine independence")
        if np.all(w >= -tol):
            return i
    raise ReplacementError("no replacement vertex found: hypothesis violated")
