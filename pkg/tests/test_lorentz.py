"""Tests for the indefinite-form linear algebra layer."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperroll.lorentz import (
    AlgebraElement,
    BilinearForm,
    SignatureError,
    SubspaceBasis,
    algebra_dim_bound,
    algebra_membership,
    antisymmetrize,
    bracket,
    classify_pair,
    form_eval,
    intersection_dim,
    invariant_subspaces,
    lie_closure,
    perp_h,
    restricted_signature,
)


def boost(n, i):
    """so(n,1) boost mixing spatial direction i with the last coordinate."""
    k = np.zeros((n + 1, n + 1))
    k[i, n] = 1.0
    k[n, i] = 1.0
    return k


def rotation(n, i, j):
    r = np.zeros((n + 1, n + 1))
    r[i, j] = -1.0
    r[j, i] = 1.0
    return r


class TestFormEval:
    def test_first_basis_vector(self):
        for n, c in [(2, -1.0), (3, 1.0), (4, -0.5)]:
            form = BilinearForm(n, c)
            e1 = np.eye(n + 1)[0]
            assert form_eval(e1, e1, form) == pytest.approx(1.0)

    def test_last_coordinate_weight(self):
        form = BilinearForm(2, -1.0)
        e_last = np.eye(3)[2]
        assert form_eval(e_last, e_last, form) == pytest.approx(-1.0)

    def test_direct_sum(self):
        # 1*3 + 0*0 + (1/-1)*2*1 = 3 - 2 = 1
        form = BilinearForm(2, -1.0)
        assert form_eval([1, 0, 2], [3, 0, 1], form) == pytest.approx(1.0)

    def test_symmetry_random(self):
        rng = np.random.default_rng(0)
        form = BilinearForm(3, -2.0)
        for _ in range(5):
            x, y = rng.standard_normal((2, 4))
            assert form_eval(x, y, form) == pytest.approx(form_eval(y, x, form))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            form_eval([1, 0], [1, 0, 0], BilinearForm(2, -1.0))

    def test_signature(self):
        assert BilinearForm(3, 1.0).signature() == (4, 0)
        assert BilinearForm(3, -1.0).signature() == (3, 1)
        w = np.linalg.eigvalsh(BilinearForm(3, -1.0).matrix())
        assert int(np.sum(w < 0)) == 1

    def test_c_zero_rejected(self):
        with pytest.raises(ValueError):
            BilinearForm(2, 0.0)


class TestAlgebraMembership:
    def test_zero_matrix(self):
        assert algebra_membership(np.zeros((3, 3)), BilinearForm(2, -1.0))

    def test_boost_is_member(self):
        # K^T diag(1,1,-1) + diag(1,1,-1) K = 0 for the symmetric boost
        form = BilinearForm(2, -1.0)
        k = boost(2, 0)
        J = form.matrix()
        assert np.abs(k.T @ J + J @ k).max() == pytest.approx(0.0)
        assert algebra_membership(k, form)

    def test_identity_not_member(self):
        assert not algebra_membership(np.eye(3), BilinearForm(2, -1.0))

    def test_antisymmetrize_projects(self):
        rng = np.random.default_rng(1)
        form = BilinearForm(3, -1.0)
        a = antisymmetrize(rng.standard_normal((4, 4)), form)
        assert algebra_membership(a, form, tol=1e-12)


class TestBracket:
    def test_self_bracket_vanishes(self):
        form = BilinearForm(2, -1.0)
        a = AlgebraElement(boost(2, 0), form)
        assert np.abs(bracket(a, a).mat).max() == 0.0

    def test_boosts_bracket_to_rotation(self):
        # direct 3x3 multiplication: [K1, K2] = e1 e2^T - e2 e1^T
        form = BilinearForm(2, -1.0)
        k1, k2 = boost(2, 0), boost(2, 1)
        expected = k1 @ k2 - k2 @ k1
        assert expected[0, 1] == pytest.approx(1.0)
        assert expected[1, 0] == pytest.approx(-1.0)
        got = bracket(AlgebraElement(k1, form), AlgebraElement(k2, form))
        np.testing.assert_allclose(got.mat, expected)
        assert got.check()

    def test_context_mismatch(self):
        a = AlgebraElement(boost(2, 0), BilinearForm(2, -1.0))
        b = AlgebraElement(boost(2, 0), BilinearForm(2, 1.0))
        with pytest.raises(ValueError):
            bracket(a, b)

    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_jacobi_identity(self, seed):
        rng = np.random.default_rng(seed)
        form = BilinearForm(2, -1.0)
        a, b, c = (
            AlgebraElement(antisymmetrize(rng.standard_normal((3, 3)), form), form)
            for _ in range(3)
        )
        lhs = (
            bracket(a, bracket(b, c)).mat
            + bracket(b, bracket(c, a)).mat
            + bracket(c, bracket(a, b)).mat
        )
        assert np.abs(lhs).max() < 1e-12

    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_h_antisymmetry_of_algebra_action(self, seed):
        rng = np.random.default_rng(seed)
        form = BilinearForm(3, -1.0)
        a = antisymmetrize(rng.standard_normal((4, 4)), form)
        v, w = rng.standard_normal((2, 4))
        assert abs(form_eval(a @ v, w, form) + form_eval(v, a @ w, form)) < 1e-10


class TestLieClosure:
    def test_single_rotation(self):
        form = BilinearForm(2, 1.0)
        basis, dim = lie_closure([AlgebraElement(rotation(2, 0, 1), form)])
        assert dim == 1

    def test_so3_from_two_rotations(self):
        form = BilinearForm(2, 1.0)
        gens = [
            AlgebraElement(rotation(2, 0, 1), form),
            AlgebraElement(rotation(2, 1, 2), form),
        ]
        _, dim = lie_closure(gens)
        assert dim == 3 == algebra_dim_bound(form)

    def test_so21_from_two_boosts(self):
        form = BilinearForm(2, -1.0)
        gens = [AlgebraElement(boost(2, 0), form), AlgebraElement(boost(2, 1), form)]
        basis, dim = lie_closure(gens)
        assert dim == 3
        assert all(b.check(1e-9) for b in basis)

    def test_empty(self):
        assert lie_closure([]) == ([], 0)

    def test_idempotent(self):
        form = BilinearForm(3, -1.0)
        gens = [AlgebraElement(boost(3, 0), form), AlgebraElement(boost(3, 1), form)]
        basis, dim = lie_closure(gens)
        _, dim2 = lie_closure(basis)
        assert dim2 == dim

    def test_min_norm_filters_noise(self):
        form = BilinearForm(2, -1.0)
        noise = AlgebraElement(1e-10 * boost(2, 0), form)
        _, dim = lie_closure([noise], min_norm=1e-7)
        assert dim == 0


class TestInvariantSubspaces:
    def test_so_n_block_fixes_last_axis(self):
        # generators supported on the first n rows/columns leave span{e_{n+1}}
        # and its complement invariant
        form = BilinearForm(3, -1.0)
        gens = [
            AlgebraElement(rotation(3, i, j), form)
            for i, j in [(0, 1), (0, 2), (1, 2)]
        ]
        subs = invariant_subspaces(gens, form)
        e_last = np.eye(4)[3]
        assert any(s.dim == 1 and s.contains(e_last) for s in subs)
        assert any(s.dim == 3 and not s.contains(e_last) for s in subs)

    def test_full_so21_has_none(self):
        form = BilinearForm(2, -1.0)
        gens = [
            AlgebraElement(boost(2, 0), form),
            AlgebraElement(boost(2, 1), form),
            AlgebraElement(rotation(2, 0, 1), form),
        ]
        assert invariant_subspaces(gens, form) == []

    def test_lightlike_kernel_line(self):
        # N in so(2,1) with N(e1 + e3) = 0: rotation + compensating boost
        form = BilinearForm(2, -1.0)
        n = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, -1.0], [0.0, -1.0, 0.0]])
        assert algebra_membership(n, form, 1e-12)
        null_dir = np.array([1.0, 0.0, 1.0])
        np.testing.assert_allclose(n @ null_dir, 0.0, atol=1e-14)
        subs = invariant_subspaces([AlgebraElement(n, form)], form)
        assert any(s.dim == 1 and s.contains(null_dir) for s in subs)

    def test_invariance_residuals(self):
        form = BilinearForm(3, -1.0)
        gens = [
            AlgebraElement(rotation(3, i, j), form)
            for i, j in [(0, 1), (0, 2), (1, 2)]
        ]
        for s in invariant_subspaces(gens, form):
            for g in gens:
                for v in s.vectors:
                    image = g.mat @ v
                    res = image - s.project(image)
                    assert np.linalg.norm(res) <= 1e-7 * max(
                        1.0, np.linalg.norm(image)
                    )


class TestClassifyPair:
    def test_scalar_axis_is_transversal(self):
        form = BilinearForm(3, -1.0)
        v1 = SubspaceBasis(np.eye(4)[3:])
        kind, gen = classify_pair(v1, form)
        assert kind == "transversal" and gen is None
        v2 = perp_h(v1, form)
        assert v2.dim == 3 and intersection_dim(v1, v2) == 0

    def test_lightlike_line(self):
        form = BilinearForm(2, -1.0)
        v1 = SubspaceBasis(np.array([[1.0, 0.0, 1.0]]))
        # the line is h-null: <e1+e3, e1+e3> = 1 - 1 = 0, so it lies in its
        # own h-complement
        assert form_eval([1, 0, 1], [1, 0, 1], form) == pytest.approx(0.0)
        kind, gen = classify_pair(v1, form)
        assert kind == "lightlike"
        np.testing.assert_allclose(gen, [1.0, 0.0, 1.0], atol=1e-12)
        assert np.linalg.norm(gen[:-1]) == pytest.approx(1.0)

    def test_spacelike_line_transversal(self):
        form = BilinearForm(2, -1.0)
        kind, _ = classify_pair(SubspaceBasis(np.eye(3)[:1]), form)
        assert kind == "transversal"

    def test_perp_agrees(self):
        form = BilinearForm(3, -1.0)
        for rows in [np.array([[1.0, 0.0, 0.0, 1.0]]), np.eye(4)[1:3]]:
            v1 = SubspaceBasis(rows)
            k1, _ = classify_pair(v1, form)
            k2, _ = classify_pair(perp_h(v1, form), form)
            assert k1 == k2

    def test_degenerate_raises(self):
        # a 2-plane spanned by two independent null directions meets its
        # complement in dimension >= 2 only for corrupted data; build one
        # artificially via a degenerate form... skipped for Lorentzian forms,
        # where the error path is unreachable; check the guard on V1 instead
        form = BilinearForm(2, -1.0)
        with pytest.raises(ValueError):
            classify_pair(SubspaceBasis(np.eye(3)), form)


def test_restricted_signature():
    form = BilinearForm(3, -1.0)
    v_time = SubspaceBasis(np.array([[0.0, 0, 0, 1.0], [1.0, 0, 0, 0]]))
    assert restricted_signature(v_time, form) == (1, 1, 0)
    v_space = SubspaceBasis(np.eye(4)[:2])
    assert restricted_signature(v_space, form) == (2, 0, 0)
    v_null = SubspaceBasis(np.array([[1.0, 0, 0, 1.0]]))
    assert restricted_signature(v_null, form) == (0, 0, 1)
