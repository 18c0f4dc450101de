"""Shared builders for the test suite."""

import numpy as np
import pytest

from widthcalc import PointSet, affinely_independent, barycentric, validate

GOLDEN_RAW = {"q": 2, "k": [16],
              "balls": [{"nu": 1, "p": ["inf"]}, {"nu": 4, "p": [1]}]}


@pytest.fixture
def golden_family():
    """The d=1 two-ball worked example: psi = 2 at the m=2 certificate."""
    return validate(GOLDEN_RAW)


@pytest.fixture
def degenerate_d2_family():
    """d=2 pair whose I={2} projections coincide and whose interpolated
    exponent hits q off the active set; psi = sqrt(2), not in general
    position."""
    return validate({"q": 2, "k": [4, 4], "balls": [
        {"label": "a", "nu": 1, "u": [0.0, 0.5]},
        {"label": "b", "nu": 2, "u": [1.0, 0.5]}]})


def make_replacement_trial(rng: np.random.Generator, m: int):
    """Random (points, eta, a) satisfying the replacement hypotheses:
    affinely independent points, strictly interior query point, and eta
    keeping every single-point replacement affinely independent."""
    while True:
        pts = rng.standard_normal((m, m - 1))
        ps = PointSet(tuple(map(tuple, pts)))
        if m > 1 and not affinely_independent(ps, 1e-6):
            continue
        wts = rng.dirichlet(np.ones(m)) * 0.8 + 0.2 / m
        a = wts @ pts
        eta = tuple(rng.standard_normal(m - 1) * 2.0)
        ok = True
        for i in range(m):
            replaced = PointSet(ps.points[:i] + (eta,) + ps.points[i + 1:])
            if m > 1 and not affinely_independent(replaced, 1e-6):
                ok = False
                break
        if ok:
            return ps, eta, tuple(a)


def brute_replacement_indices(ps: PointSet, eta, a, tol: float = 1e-10):
    """All indices whose replacement simplex contains a (test oracle)."""
    valid = []
    for i in range(ps.m):
        replaced = PointSet(ps.points[:i] + (tuple(eta),) + ps.points[i + 1:])
        try:
            w = barycentric(replaced, a)
        except Exception:
            continue
        if np.all(w >= -tol):
            valid.append(i)
    return valid
