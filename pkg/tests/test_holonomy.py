"""Tests for holonomy sampling, algebra dimension, and classification."""

import numpy as np
import pytest

from hyperroll import holonomy as ho
from hyperroll import lorentz as lz
from hyperroll import manifolds as mf
from hyperroll.connection import extended_frame

FAST = ho.SamplingConfig(n_sample_points=6, loop_count=10, stability_check=False)


class TestLoopTransport:
    def test_self_rolling_identity(self):
        spec = mf.hyperbolic_space(2)
        base = np.array([0.05, -0.1])
        for loop in ho.default_loop_family(spec, base, 8, (0.1, 0.15), seed=4):
            t = ho.loop_transport(spec, -1.0, loop)
            assert np.abs(t - np.eye(3)).max() < 1e-6

    def test_degenerate_loop_identity(self):
        spec = mf.perturbed_flat(2, 0.1, seed=1)
        loop = mf.rectangle_loop(spec, np.array([0.1, 0.1]), (0, 1), 0.0)
        t = ho.loop_transport(spec, -1.0, loop)
        np.testing.assert_allclose(t, np.eye(3), atol=1e-12)

    def test_form_preserved(self):
        spec = mf.perturbed_flat(2, 0.15, seed=2)
        form = lz.BilinearForm(2, -1.0)
        base = np.array([0.0, 0.0])
        for loop in ho.default_loop_family(spec, base, 6, (0.12,), seed=0):
            t = ho.loop_transport(spec, -1.0, loop)
            assert ho.form_defect(t, form) < 1e-6

    def test_flat_rectangle_matches_exp_of_curvature(self):
        # log of the loop transport ~ -eps^2 (B block), cf. the frozen sign
        from scipy.linalg import expm
        from hyperroll.connection import rolling_curvature

        spec = mf.flat_space(2)
        base = np.zeros(2)
        eps = 0.1
        loop = mf.rectangle_loop(spec, base, (0, 1), eps)
        t = ho.loop_transport(spec, -1.0, loop, step=1e-3)
        curv = rolling_curvature(spec, -1.0, base, np.eye(2)[0], np.eye(2)[1]).mat
        # chart frame and orthonormal frame agree for the flat metric;
        # the residual is the eps^3/2 boost correction
        assert np.abs(t - expm(-eps**2 * curv)).max() < 1.2 * eps**3

    def test_open_path_rejected(self):
        spec = mf.flat_space(2)
        path = mf.chart_path(spec, [[0, 0], [0.3, 0.2]])
        with pytest.raises(ho.LoopError):
            ho.loop_transport(spec, -1.0, path)


class TestAmbroseSinger:
    def test_space_form_generators_vanish(self):
        spec = mf.hyperbolic_space(2)
        gens = ho.ambrose_singer_generators(
            spec, -1.0, np.array([0.1, 0.0]),
            points=[np.array([0.3, -0.2])], config=FAST)
        assert max(np.abs(g.mat).max() for g in gens) < 1e-9

    def test_flat_base_point_gives_b_blocks(self):
        spec = mf.flat_space(3)
        base = np.zeros(3)
        gens = ho.ambrose_singer_generators(spec, -1.0, base, points=[], config=FAST)
        assert len(gens) == 3  # planes (0,1), (0,2), (1,2)
        for g, (i, j) in zip(gens, [(0, 1), (0, 2), (1, 2)]):
            expected = np.zeros((4, 4))
            expected[i, j] = 1.0
            expected[j, i] = -1.0
            np.testing.assert_allclose(g.mat, expected, atol=1e-12)

    def test_sphere_single_point_nonzero_and_member(self):
        spec = mf.sphere_space(2)
        gens = ho.ambrose_singer_generators(
            spec, -1.0, np.array([0.1, 0.05]),
            points=[np.array([0.3, -0.1])], config=FAST)
        assert all(g.check(1e-7) for g in gens)
        assert max(np.abs(g.mat).max() for g in gens) > 0.5


class TestHolonomyAlgebra:
    def test_sphere_reaches_so21(self):
        alg = ho.holonomy_algebra(
            mf.sphere_space(2), -1.0, np.array([0.1, 0.05]), FAST)
        assert alg.dim == 3 == ho.FULL_DIM(alg.form)

    def test_self_rolling_dim_zero(self):
        alg = ho.holonomy_algebra(
            mf.hyperbolic_space(2), -1.0, np.array([0.1, -0.1]), FAST)
        assert alg.dim == 0

    def test_exp_warp_dim_deficient(self):
        alg = ho.holonomy_algebra(
            mf.exp_warp(), -1.0, np.array([0.1, 0.05, -0.1]), FAST)
        assert 0 < alg.dim < 6

    def test_positive_c_raw_dimension(self):
        # no verdict, but the algebra machinery works for c > 0
        alg = ho.holonomy_algebra(
            mf.perturbed_flat(2, 0.1, seed=7), 1.0, np.array([0.0, 0.1]), FAST)
        assert 0 <= alg.dim <= 3


class TestClassify:
    def test_exp_warp_lightlike_with_radial_line(self):
        rep = ho.classify(mf.exp_warp(), -1.0, np.array([0.1, 0.05, -0.1]), FAST)
        assert rep.verdict == ho.VERDICT_LIGHTLIKE
        ell = rep.lightlike_direction
        assert np.linalg.norm(ell - np.array([1.0, 0.0, 0.0])) < 1e-5

    def test_sinh_cosh_warp_transversal(self):
        spec = mf.sinh_cosh_warp()
        rep = ho.classify(spec, -1.0, spec.center() + 0.05, FAST)
        assert rep.verdict == ho.VERDICT_TRANSVERSAL
        assert not rep.n1_hit
        # the reported V1 is Lorentzian
        v1 = next(s for s in rep.invariant_subspaces
                  if lz.restricted_signature(s, lz.BilinearForm(4, -1.0))[1] == 1)
        assert v1.dim == 3

    def test_perturbed_flat_controllable(self):
        rep = ho.classify(
            mf.perturbed_flat(2, 0.1, seed=7), -1.0, np.array([0.0, 0.1]), FAST)
        assert rep.verdict == ho.VERDICT_IRREDUCIBLE
        assert rep.algebra_dim == 3

    def test_flat_connection_note(self):
        rep = ho.classify(
            mf.hyperbolic_space(2), -1.0, np.array([0.1, -0.1]), FAST)
        assert rep.algebra_dim == 0
        assert rep.verdict == ho.VERDICT_TRANSVERSAL
        assert "degenerate" in rep.diagnostics["note"]

    def test_graph_cosh_warp_origin_slice_hits_n1(self):
        # base point over the distinguished origin of the base factor
        spec = mf.graph_cosh_warp(k=2)
        rep = ho.classify(spec, -1.0, np.array([0.0, 0.0, 0.1, -0.05]), FAST)
        assert rep.verdict == ho.VERDICT_TRANSVERSAL
        assert rep.n1_hit

    def test_reported_subspace_invariant_under_basis(self):
        # every algebra basis element maps the reported invariant subspace
        # into itself within tolerance
        rep = ho.classify(mf.exp_warp(), -1.0, np.array([0.1, 0.05, -0.1]), FAST)
        for sub in rep.invariant_subspaces:
            for g in rep.algebra_basis:
                for v in sub.vectors:
                    img = g.mat @ v
                    res = img - sub.project(img)
                    assert np.linalg.norm(res) <= 1e-6 * max(
                        1.0, np.linalg.norm(img))

    def test_verdict_frame_invariance(self):
        spec = mf.exp_warp()
        r1 = ho.classify(spec, -1.0, np.array([0.1, 0.05, -0.1]), FAST)
        r2 = ho.classify(spec, -1.0, np.array([-0.2, -0.1, 0.2]), FAST)
        assert r1.verdict == r2.verdict == ho.VERDICT_LIGHTLIKE

    def test_positive_c_rejected(self):
        with pytest.raises(ValueError, match="c < 0"):
            ho.classify(mf.sphere_space(2), 1.0, np.array([0.0, 0.0]), FAST)

    def test_report_serializes(self):
        import json
        rep = ho.classify(
            mf.hyperbolic_space(2), -1.0, np.array([0.1, -0.1]), FAST)
        blob = json.dumps(rep.to_dict())
        assert "verdict" in blob


def test_dimension_monotone_in_samples():
    spec = mf.sphere_space(2)
    base = np.array([0.1, 0.05])
    dims = []
    for pts, loops in [(2, 2), (4, 6), (8, 12)]:
        cfg = ho.SamplingConfig(n_sample_points=pts, loop_count=loops,
                                stability_check=False)
        dims.append(ho.holonomy_algebra(spec, -1.0, base, cfg).dim)
    assert dims == sorted(dims)
