import numpy as np
import pytest

from widthcalc import (
    PointSet,
    ReplacementError,
    SingularSystemError,
    affinely_independent,
    barycentric,
    replacement_vertex,
)

from conftest import brute_replacement_indices, make_replacement_trial


def svd_affinely_independent(ps: PointSet, tol: float) -> bool:
    """SVD oracle for the complete-pivoting rank test."""
    pts = ps.as_array()
    if ps.m == 1:
        return True
    diffs = pts[1:] - pts[0]
    return float(np.linalg.svd(diffs, compute_uv=False).min()) > tol


class TestAffinelyIndependent:
    def test_examples(self):
        assert affinely_independent(PointSet(((0.0,), (1.0,))))
        assert not affinely_independent(PointSet(((0.5,), (0.5,))))
        assert affinely_independent(PointSet(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))))
        assert affinely_independent(PointSet(((0.7,),)))  # single point

    def test_agrees_with_svd_oracle(self):
        rng = np.random.default_rng(21)
        agree = 0
        for _ in range(400):
            m = int(rng.integers(2, 6))
            pts = rng.standard_normal((m, m - 1))
            if rng.uniform() < 0.4:
                # force (near-)degeneracy: last point onto an affine combo
                w = rng.dirichlet(np.ones(m - 1))
                pts[-1] = w @ pts[:-1] + rng.standard_normal(m - 1) * 1e-14
            ps = PointSet(tuple(map(tuple, pts)))
            # avoid flapping right at the threshold: compare at tolerances
            # a decade apart
            sv = np.linalg.svd(pts[1:] - pts[0], compute_uv=False).min()
            if 1e-11 < sv < 1e-9:
                continue
            assert affinely_independent(ps, 1e-10) == svd_affinely_independent(ps, 1e-10)
            agree += 1
        assert agree > 300

    def test_tol_validation(self):
        with pytest.raises(ValueError):
            affinely_independent(PointSet(((0.0,), (1.0,))), tol=0.0)


class TestBarycentric:
    def test_midpoint(self):
        w = barycentric(PointSet(((0.0,), (1.0,))), (0.5,))
        np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-15)

    def test_triangle_hand_solve(self):
        # a = (1/4, 1/4) in the standard simplex: w = (1/2, 1/4, 1/4)
        ps = PointSet(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))
        w = barycentric(ps, (0.25, 0.25))
        np.testing.assert_allclose(w, [0.5, 0.25, 0.25], atol=1e-14)

    def test_vertex(self):
        ps = PointSet(((0.2, 0.7), (0.9, 0.1), (0.4, 0.4)))
        w = barycentric(ps, (0.2, 0.7))
        np.testing.assert_allclose(w, [1.0, 0.0, 0.0], atol=1e-12)

    def test_residual_postcondition(self):
        rng = np.random.default_rng(22)
        for _ in range(200):
            m = int(rng.integers(1, 6))
            pts = rng.standard_normal((m, m - 1))
            ps = PointSet(tuple(map(tuple, pts)))
            if not affinely_independent(ps, 1e-8):
                continue
            a = rng.dirichlet(np.ones(m)) @ pts
            w = barycentric(ps, tuple(a))
            assert abs(w.sum() - 1.0) <= 1e-10
            np.testing.assert_allclose(
                w @ pts, a, atol=1e-10 * (1 + np.abs(a).max(initial=0.0)))

    def test_affine_invariance(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            m = int(rng.integers(2, 6))
            pts = rng.standard_normal((m, m - 1))
            ps = PointSet(tuple(map(tuple, pts)))
            if not affinely_independent(ps, 1e-8):
                continue
            a = rng.dirichlet(np.ones(m)) @ pts
            w = barycentric(ps, tuple(a))
            B = rng.standard_normal((m - 1, m - 1))
            if abs(np.linalg.det(B)) < 1e-3:
                continue
            c = rng.standard_normal(m - 1)
            mapped = PointSet(tuple(tuple(B @ p + c) for p in pts))
            w2 = barycentric(mapped, tuple(B @ a + c))
            np.testing.assert_allclose(w, w2, atol=1e-9)

    def test_singular_raises(self):
        with pytest.raises(SingularSystemError):
            barycentric(PointSet(((0.5,), (0.5,))), (0.5,))


class TestReplacementVertex:
    def test_two_point_example(self):
        # points 0 and 1, eta = 2, query 0.5: conv{0, 2} contains 0.5 but
        # conv{1, 2} does not, so the second point (index 1) is replaced
        ps = PointSet(((0.0,), (1.0,)))
        assert replacement_vertex(ps, (2.0,), (0.5,)) == 1

    def test_interior_eta_returns_first_valid(self):
        rng = np.random.default_rng(24)
        for _ in range(50):
            m = int(rng.integers(2, 5))
            ps, _, a = make_replacement_trial(rng, m)
            pts = ps.as_array()
            eta = tuple(rng.dirichlet(np.ones(m) * 5) @ pts)  # interior eta
            valid = brute_replacement_indices(ps, eta, a)
            assert valid, "interior eta must admit a replacement"
            assert replacement_vertex(ps, eta, a) == min(valid)

    def test_standard_simplex_hand_case(self):
        ps = PointSet(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))
        eta, a = (2.0, 2.0), (0.3, 0.3)
        i = replacement_vertex(ps, eta, a)
        assert i in brute_replacement_indices(ps, eta, a)

    def test_not_interior_raises(self):
        ps = PointSet(((0.0,), (1.0,)))
        with pytest.raises(ReplacementError, match="interior"):
            replacement_vertex(ps, (2.0,), (0.0,))

    def test_dependent_replacement_raises(self):
        # eta equal to an existing point breaks the hypothesis
        ps = PointSet(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))
        with pytest.raises(ReplacementError, match="affine independence"):
            replacement_vertex(ps, (1.0, 0.0), (0.25, 0.25))

    def test_randomized_contract(self):
        rng = np.random.default_rng(25)
        for _ in range(500):
            m = int(rng.integers(2, 6))
            ps, eta, a = make_replacement_trial(rng, m)
            i = replacement_vertex(ps, eta, a)
            replaced = PointSet(ps.points[:i] + (eta,) + ps.points[i + 1:])
            w = barycentric(replaced, a)
            assert np.all(w >= -1e-10)
