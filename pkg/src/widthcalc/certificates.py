"""Certificate enumeration and the combinatorial width estimate.

A certificate is an m-tuple of distinct balls (1 <= m <= d+1) together with
an active coordinate set I of size m-1 whose interpolation weights lambda
solve

    sum_j lambda_j * u_{alpha_j, i} = 1/q   for i in I,
    sum_j lambda_j = 1,

with all lambda_j strictly positive and the projections of the exponent
vectors to I affinely independent.  Its value is the radius product
prod nu^lambda times the width monomial of the interpolated exponent
vector; the estimate Psi is the minimum value over all certificates.

Unordered tuples are enumerated (combinations, not permutations): the solved
weights depend only on the set, so the minimum is unchanged and a factor m!
of work is saved.  Enumeration order is lexicographic in (m, ball indices,
I), which fixes the argmin deterministically under ties.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence, Union

import numpy as np

from .exponents import ExponentVector, phi
from .family import BallFamily
from .geometry import PointSet, affinely_independent

DEFAULT_CAP = 10_000_000

# Weights at or below this are treated as zero: the candidate's value is
# then attained by a strict sub-tuple, so nothing is lost by dropping it.
TOL_POSITIVE = 1e-12


class EnumerationCapError(RuntimeError):
    """Candidate cap exceeded; carries the partial enumeration."""

    def __init__(self, message: str, partial: "Enumeration"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Certificate:
    """A solved candidate: tuple of balls, active set, weights, interpolated
    exponents, and the log of its value."""

    m: int
    labels: tuple[str, ...]
    I: tuple[int, ...]              # 0-based coordinate indices, sorted
    lam: tuple[float, ...]
    theta_u: ExponentVector
    log_value: float

    @property
    def cert_id(self) -> str:
        """Stable identifier, 1-based coordinates; "-" for the empty set."""
        i_str = ",".join(str(i + 1) for i in self.I) if self.I else "-"
        return f"m={self.m}|balls={','.join(self.labels)}|I={i_str}"

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "balls": list(self.labels),
            "I": [i + 1 for i in self.I],
            "lambda": list(self.lam),
            "theta_u": list(self.theta_u.u),
            "theta_p": self.theta_u.p_values(),
            "log_value": self.log_value,
            "id": self.cert_id,
        }


@dataclass(frozen=True)
class Enumeration:
    certificates: tuple[Certificate, ...]
    counts: dict


@dataclass(frozen=True)
class PsiResult:
    log_psi: float
    best: Certificate
    counts: dict
    all_candidates: Optional[tuple[Certificate, ...]] = None


def _resolve_indices(f: BallFamily, tup: Sequence[Union[str, int]]) -> list[int]:
    idx = []
    for entry in tup:
        if isinstance(entry, str):
            try:
                idx.append(f.labels.index(entry))
            except ValueError:
                raise KeyError(f"no ball labeled {entry!r} in family") from None
        else:
            idx.append(int(entry))
    if len(set(idx)) != len(idx):
        raise ValueError(f"tuple entries must be distinct, got {tup}")
    return idx


def solve_lambda(f: BallFamily, tup: Sequence[Union[str, int]],
                 I: Sequence[int], tol_rank: float = 1e-10,
                 tol_pos: float = TOL_POSITIVE,
                 ) -> Optional[tuple[np.ndarray, ExponentVector]]:
    """Solve the interpolation system for a tuple of balls and active set I
    (0-based coordinates).

    Returns (lambda, theta_u), or None when the candidate is degenerate: the
    projections to I are affinely dependent, or some weight is <= tol_pos.
    Degeneracy is a normal outcome, not an error.  For m = 1 the weight
    vector is (1,) unconditionally.
    """
    idx = _resolve_indices(f, tup)
    m = len(idx)
    I = sorted(int(i) for i in I)
    if len(I) != m - 1:
        raise ValueError(f"need |I| = m-1 = {m - 1}, got {len(I)}")
    if any(i < 0 or i >= f.d for i in I):
        raise ValueError(f"coordinate set {I} out of range for d={f.d}")
    if not (1 <= m <= f.d + 1):
        raise ValueError(f"tuple size m={m} out of range [1, {f.d + 1}]")

    um = f.u_matrix()
    if m == 1:
        return np.ones(1), f.balls[idx[0]].u

    proj = um[np.ix_(idx, I)]
    if not affinely_independent(PointSet(tuple(map(tuple, proj))), tol_rank):
        return None

    mat = np.vstack([proj.T, np.ones((1, m))])
    rhs = np.concatenate([np.full(m - 1, f.q.uq), [1.0]])
    try:
        lam = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError:
        return None
    if np.any(lam <= tol_pos):
        return None
    theta = lam @ um[idx]
    return lam, ExponentVector(tuple(float(x) for x in theta))


def _solve_candidate(f: BallFamily, log_nus: np.ndarray, idx: tuple[int, ...],
                     I: tuple[int, ...], tol_rank: float, tol_pos: float,
                     ) -> Optional[Certificate]:
    sol = solve_lambda(f, idx, I, tol_rank=tol_rank, tol_pos=tol_pos)
    if sol is None:
        return None
    lam, theta_u = sol
    log_value = float(lam @ log_nus[list(idx)]) + phi(theta_u, f.ks, f.q)
    return Certificate(
        m=len(idx),
        labels=tuple(f.labels[j] for j in idx),
        I=I,
        lam=tuple(float(x) for x in lam),
        theta_u=theta_u,
        log_value=log_value,
    )


def enumerate_certificates(f: BallFamily, cap: int = DEFAULT_CAP,
                           tol_rank: float = 1e-10,
                           tol_pos: float = TOL_POSITIVE,
                           threads: int = 1) -> Enumeration:
    """All certificates of the family in deterministic order.

    Iterates m = 1..min(d+1, |A|), all m-combinations of ball indices, all
    coordinate sets I of size m-1, and keeps the non-degenerate solutions.
    Raises EnumerationCapError (carrying the partial result) once more than
    ``cap`` (tuple, I) pairs have been examined.

    Results are identical for any thread count: candidates are generated in
    a fixed order and solved independently.
    """
    log_nus = f.log_nus()
    tasks: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    examined_by_m: dict[int, int] = {}
    capped = False
    for m in range(1, min(f.d + 1, f.size) + 1):
        for subset in combinations(range(f.size), m):
            for I in combinations(range(f.d), m - 1):
                if len(tasks) >= cap:
                    capped = True
                    break
                tasks.append((subset, I))
                examined_by_m[m] = examined_by_m.get(m, 0) + 1
            if capped:
                break
        if capped:
            break

    def solve(task):
        subset, I = task
        return _solve_candidate(f, log_nus, subset, I, tol_rank, tol_pos)

    if threads > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(solve, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    else:
        solved = [solve(t) for t in tasks]

    certs = tuple(c for c in solved if c is not None)
    counts = {
        "pairs_examined": len(tasks),
        "certificates": len(certs),
        "degenerate": len(tasks) - len(certs),
        "examined_by_m": {str(m): n for m, n in sorted(examined_by_m.items())},
    }
    result = Enumeration(certificates=certs, counts=counts)
    if capped:
        raise EnumerationCapError(
            f"enumeration cap of {cap} (tuple, I) pairs exceeded; "
            "rerun with a larger --cap", partial=result)
    return result


def psi(f: BallFamily, cap: int = DEFAULT_CAP, tol_rank: float = 1e-10,
        tol_pos: float = TOL_POSITIVE, threads: int = 1,
        keep_all: bool = False) -> PsiResult:
    """Minimum certificate value and its argmin certificate.

    Single-ball certificates always exist, so the minimum is well defined.
    Ties go to the earliest certificate in enumeration order.
    """
    enum = enumerate_certificates(f, cap=cap, tol_rank=tol_rank,
                                  tol_pos=tol_pos, threads=threads)
    best = None
    for c in enum.certificates:
        if best is None or c.log_value < best.log_value:
            best = c
    assert best is not None
    return PsiResult(
        log_psi=best.log_value,
        best=best,
        counts=enum.counts,
        all_candidates=enum.certificates if keep_all else None,
    )
