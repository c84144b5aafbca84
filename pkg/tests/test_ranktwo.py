"""The rank-two parametrization and its stationarity calculus."""

import math
from fractions import Fraction

import numpy as np
import pytest

from swissfrancs.core import (Convention, FeasibilityError, ProbMatrix,
                              RankTwoError, WeightTable, log_likelihood)
from swissfrancs.ranktwo import (RankTwoPoint, canonicalize, from_matrix,
                                 normalize_margins, reciprocal_residual,
                                 reciprocal_residual_exact,
                                 stationarity_residual, swap_delta, to_matrix)

F = Fraction
A5 = 1 / math.sqrt(5)
A15 = 1 / math.sqrt(15)

P2_POINT = RankTwoPoint.symmetric([A5, A5, -A5, -A5])
P1_POINT = RankTwoPoint.symmetric([A15, A15, A15, -3 * A15])
P4_POINT = RankTwoPoint.symmetric([1 / math.sqrt(3), 0.0, 0.0, -1 / math.sqrt(3)])


def random_feasible(rng, n=4):
    while True:
        a = rng.uniform(-0.3, 0.3, size=n)
        b = rng.uniform(-0.3, 0.3, size=n)
        a -= a.mean()
        b -= b.mean()
        if (1 + np.outer(b, a)).min() > 0.05:
            return RankTwoPoint.of(a, b)


class TestToMatrix:
    def test_zero_gives_flat(self):
        matrix = to_matrix(RankTwoPoint.symmetric([0.0] * 4))
        assert np.array_equal(matrix.as_array(), np.ones((4, 4)))

    def test_block_point(self):
        matrix = to_matrix(P2_POINT).as_array()
        expected = np.array([[1.2, 1.2, 0.8, 0.8],
                             [1.2, 1.2, 0.8, 0.8],
                             [0.8, 0.8, 1.2, 1.2],
                             [0.8, 0.8, 1.2, 1.2]])
        assert np.allclose(matrix, expected, atol=1e-15)

    def test_three_one_point(self):
        matrix = to_matrix(P1_POINT).as_array()
        assert matrix[0, 0] == pytest.approx(16 / 15, abs=1e-15)
        assert matrix[3, 0] == pytest.approx(4 / 5, abs=1e-15)
        assert matrix[3, 3] == pytest.approx(8 / 5, abs=1e-15)

    def test_margins_always_n(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            pt = random_feasible(rng)
            arr = to_matrix(pt).as_array()
            assert np.abs(arr.sum(axis=0) - 4).max() < 1e-12
            assert np.abs(arr.sum(axis=1) - 4).max() < 1e-12

    def test_infeasible_rejected(self):
        pt = RankTwoPoint.of([1.0, 0.5, -0.5, -1.0], [2.0, 1.0, -1.0, -2.0])
        with pytest.raises(FeasibilityError):
            to_matrix(pt)

    def test_gauge_invariance_bit_stable(self):
        rng = np.random.default_rng(42)
        pt = random_feasible(rng)
        base = to_matrix(pt).as_array()
        a, b = pt.arrays()
        for _ in range(1000):
            c = rng.uniform(0.1, 10.0)
            rescaled = RankTwoPoint.of(c * a, b / c)
            assert np.abs(to_matrix(rescaled).as_array() - base).max() <= 1e-12


class TestFromMatrix:
    def test_flat_gives_zero(self):
        flat = ProbMatrix.of([[1.0] * 4] * 4, Convention.SUM_NSQ)
        pt = from_matrix(flat)
        assert pt.is_zero()

    def test_block_matrix_recovers_canonical_point(self):
        pt = from_matrix(to_matrix(P2_POINT))
        assert np.allclose(pt.a, pt.b, atol=1e-9)
        assert pt.a[0] == pytest.approx(A5, abs=1e-9)

    def test_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            pt = random_feasible(rng)
            matrix = to_matrix(pt)
            back = to_matrix(from_matrix(matrix))
            assert np.abs(back.as_array() - matrix.as_array()).max() < 1e-9

    def test_point_round_trip_up_to_gauge(self):
        # (a, b) and (-a, -b) encode the same matrix, so the recovered
        # point must canonicalize to one of the two sign representatives
        def sign_variants(pt):
            out = []
            for sign in (1.0, -1.0):
                try:
                    out.append(canonicalize(RankTwoPoint.of(
                        sign * np.array(pt.a), sign * np.array(pt.b))))
                except RankTwoError:
                    pass
            return out

        rng = np.random.default_rng(19)
        for _ in range(25):
            pt = random_feasible(rng)
            expected = sign_variants(pt)
            recovered = sign_variants(from_matrix(to_matrix(pt)))
            if not expected:
                continue
            assert recovered
            assert any(np.allclose(r.a, v.a, atol=1e-8)
                       and np.allclose(r.b, v.b, atol=1e-8)
                       for r in recovered for v in expected)

    def test_rank_three_rejected(self):
        rng = np.random.default_rng(9)
        raw = rng.uniform(0.5, 1.5, size=(4, 4))
        # force margins to n while keeping full rank
        for _ in range(200):
            raw *= (4.0 / raw.sum(axis=1))[:, None]
            raw *= (4.0 / raw.sum(axis=0))[None, :]
        matrix = ProbMatrix.of(raw.tolist(), Convention.SUM_NSQ)
        with pytest.raises(RankTwoError, match="rank-two"):
            from_matrix(matrix)

    def test_unequal_margins_rejected(self):
        raw = np.ones((4, 4))
        raw[0] = [2.0, 2.0, 2.0, 2.0]
        raw[1] = [0.0, 0.0, 0.0, 0.0] * 1
        raw[1] = [0.5, 0.5, 0.5, 0.5]
        raw[2] = [0.75, 0.75, 0.75, 0.75]
        raw[3] = [0.75, 0.75, 0.75, 0.75]
        matrix = ProbMatrix.of(raw.tolist(), Convention.SUM_NSQ)
        with pytest.raises(RankTwoError, match="sums"):
            from_matrix(matrix)


class TestResiduals:
    def test_zero_point_any_ratio(self):
        pt = RankTwoPoint.symmetric([0.0] * 4)
        for rho in (0.5, 1.0, 2.0, 7.0):
            assert np.abs(stationarity_residual(pt, rho)).max() == 0.0
            assert np.abs(reciprocal_residual(pt, rho)).max() == pytest.approx(0.0, abs=1e-14)

    def test_block_point_is_stationary(self):
        assert np.abs(stationarity_residual(P2_POINT, 2.0)).max() <= 1e-12

    def test_perturbed_point_is_not(self):
        a = np.array(P2_POINT.a)
        a[0] += 0.01
        a[3] -= 0.01
        pt = RankTwoPoint.symmetric(a)
        assert np.abs(stationarity_residual(pt, 2.0)).max() > 1e-3

    def test_exact_reciprocal_zero_for_block_products(self):
        x = F(1, 5)
        products = [[ci * cj * x for cj in (1, 1, -1, -1)] for ci in (1, 1, -1, -1)]
        residual = reciprocal_residual_exact(products, F(2))
        assert all(r == 0 for r in residual)

    def test_exact_reciprocal_zero_for_corner_products(self):
        x = F(1, 3)
        products = [[ci * cj * x for cj in (1, 0, 0, -1)] for ci in (1, 0, 0, -1)]
        residual = reciprocal_residual_exact(products, F(2))
        assert all(r == 0 for r in residual)

    def test_reciprocal_is_weighted_gradient(self):
        # componentwise, recip_i = -a_i * grad_i and recip_{n+j} = -b_j * grad_{n+j}
        rng = np.random.default_rng(17)
        for rho in (0.5, 2.0, 3.5):
            for _ in range(100):
                pt = random_feasible(rng)
                grad = stationarity_residual(pt, rho)
                recip = reciprocal_residual(pt, rho)
                scale = np.concatenate([pt.arrays()[0], pt.arrays()[1]])
                assert np.allclose(recip, -scale * grad, atol=1e-12)

    def test_residuals_vanish_together(self):
        rng = np.random.default_rng(23)
        eps = 1e-10
        for _ in range(1000):
            pt = random_feasible(rng)
            plain = np.abs(stationarity_residual(pt, 2.0)).max()
            recip = np.abs(reciprocal_residual(pt, 2.0)).max()
            scale = max(np.abs(pt.arrays()[0]).max(), np.abs(pt.arrays()[1]).max())
            assert (plain <= eps) == (recip <= 10 * eps * max(scale, 1.0))


class TestCanonicalize:
    def test_scales_to_equal_head(self):
        pt = RankTwoPoint.of([1.0, 0.5, -0.5, -1.0], [2.0, 1.0, -1.0, -2.0])
        out = canonicalize(pt)
        expected = np.array([math.sqrt(2), math.sqrt(2) / 2,
                             -math.sqrt(2) / 2, -math.sqrt(2)])
        assert np.allclose(out.a, expected, atol=1e-12)
        assert np.allclose(out.b, expected, atol=1e-12)
        # all pairwise products preserved
        before = np.outer(pt.b, pt.a)
        after = np.outer(out.b, out.a)
        assert np.allclose(np.sort(before.ravel()), np.sort(after.ravel()),
                           atol=1e-12)

    def test_idempotent(self):
        once = canonicalize(P2_POINT)
        twice = canonicalize(once)
        assert np.allclose(once.a, twice.a, atol=1e-15)
        assert np.allclose(once.b, twice.b, atol=1e-15)

    def test_flip_reverse_restores_sign_convention(self):
        # the sign-flipped three-positive point sorts to (3a, -a, -a, -a)
        # with a negative second coordinate; the flip-and-reverse map then
        # lands on the canonical (a, a, a, -3a) form
        flipped = RankTwoPoint.symmetric([-A15, -A15, -A15, 3 * A15])
        out = canonicalize(flipped)
        assert np.allclose(out.a, [A15, A15, A15, -3 * A15], atol=1e-12)
        assert out.a[1] >= 0
        # the matrix survives up to a simultaneous permutation
        original = to_matrix(flipped).as_array()
        restored = to_matrix(out).as_array()
        perm = [2, 1, 0, 3]
        assert np.allclose(restored, original[np.ix_(perm, perm)], atol=1e-12)

    def test_preserves_entry_multiset_and_likelihood(self):
        rng = np.random.default_rng(31)
        weights = WeightTable.symmetric(4, 2, 1)
        for _ in range(50):
            pt = random_feasible(rng)
            try:
                out = canonicalize(pt)
            except RankTwoError:
                continue
            assert log_likelihood(to_matrix(pt), weights) == pytest.approx(
                log_likelihood(to_matrix(out), weights), rel=1e-12, abs=1e-12)

    def test_zero_point_rejected(self):
        with pytest.raises(RankTwoError, match="zero"):
            canonicalize(RankTwoPoint.symmetric([0.0] * 4))

    def test_indefinite_head_rejected(self):
        pt = RankTwoPoint.of([0.5, 0.0, 0.0, -0.5], [-0.5, 0.0, 0.0, 0.5])
        with pytest.raises(RankTwoError, match="order hypothesis"):
            canonicalize(pt)


class TestSwapDelta:
    WEIGHTS = WeightTable.symmetric(4, 2, 1)

    def test_identity_swap(self):
        assert swap_delta(P2_POINT, 1, 1, self.WEIGHTS) == 0.0

    def test_block_point_positive(self):
        assert swap_delta(P2_POINT, 0, 2, self.WEIGHTS) > 0

    def test_sign_matches_product_sign(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            pt = random_feasible(rng)
            i, j = rng.choice(4, size=2, replace=False)
            a, b = pt.arrays()
            indicator = (a[i] - a[j]) * (b[i] - b[j])
            delta = swap_delta(pt, int(i), int(j), self.WEIGHTS)
            if indicator > 1e-12:
                assert delta > 0
            elif indicator < -1e-12:
                assert delta < 0

    def test_equal_coordinates_give_exact_zero(self):
        a = np.array([0.2, 0.2, -0.1, -0.3])
        b = np.array([0.1, 0.25, -0.15, -0.2])
        pt = RankTwoPoint.of(a, b)
        assert swap_delta(pt, 0, 1, self.WEIGHTS) == 0.0


class TestNormalizeMargins:
    def test_already_normalized_returned_unchanged(self):
        matrix = to_matrix(P2_POINT)
        assert normalize_margins(matrix) is matrix

    def test_single_row_scaling_fixed(self):
        raw = np.ones((4, 4))
        raw[0] *= 2.0
        raw[1] *= 2.0 / 3.0
        raw[2] *= 2.0 / 3.0
        raw[3] *= 2.0 / 3.0
        matrix = ProbMatrix.of(raw.tolist(), Convention.SUM_NSQ)
        out = normalize_margins(matrix).as_array()
        assert np.abs(out.sum(axis=1) - 4).max() <= 1e-12
        assert np.abs(out.sum(axis=0) - 4).max() <= 1e-12

    def test_likelihood_never_decreases(self):
        rng = np.random.default_rng(2)
        weights = WeightTable.symmetric(4, 2, 1)
        for _ in range(200):
            raw = rng.uniform(0.2, 2.0, size=(4, 4))
            raw *= 16.0 / raw.sum()
            matrix = ProbMatrix.of(raw.tolist(), Convention.SUM_NSQ)
            out = normalize_margins(matrix)
            before = log_likelihood(matrix, weights)
            after = log_likelihood(out, weights)
            assert after >= before - 1e-12
            margins_off = max(np.abs(raw.sum(axis=1) - 4).max(),
                              np.abs(raw.sum(axis=0) - 4).max())
            if margins_off > 1e-6:
                assert after > before

    def test_rank_preserved(self):
        matrix = to_matrix(P1_POINT)
        arr = matrix.as_array()
        arr[0] *= 1.25
        arr *= 16.0 / arr.sum()
        skewed = ProbMatrix.of(arr.tolist(), Convention.SUM_NSQ)
        out = normalize_margins(skewed)
        sing = np.linalg.svd(out.as_array(), compute_uv=False)
        assert sing[2] / sing[0] < 1e-12

    def test_rejects_nonpositive(self):
        rows = [[0.0, 2.0, 1.0, 1.0], [2.0, 1.0, 1.0, 0.0],
                [1.0, 1.0, 1.0, 1.0], [1.0, 0.0, 1.0, 2.0]]
        with pytest.raises(FeasibilityError):
            normalize_margins(ProbMatrix.of(rows, Convention.SUM_NSQ))


class TestPointValidation:
    def test_nonzero_sum_rejected(self):
        with pytest.raises(ValueError, match="sum to zero"):
            RankTwoPoint.of([0.1, 0.1, 0.1, 0.1], [0.0] * 4)

    def test_json_round_trip(self):
        pt = P2_POINT
        again = RankTwoPoint.from_json_dict(pt.to_json_dict())
        assert again == pt
