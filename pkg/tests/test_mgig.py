#!/usr/bin/env python3
"""
Tests for the MGIG density, its full conditionals and the four kernels.

Conditional laws are checked with slice constancy: along a slice that moves
one block and holds the rest fixed, the joint log-density minus the claimed
conditional log-density must not change.
"""

import math
import unittest

import numpy as np

from mgig_lab.core.exceptions import (
    DimMismatchError,
    IndexOutOfRangeError,
    LambdaTooSmallError,
    NotSpdError,
)
from mgig_lab.core.matrix_core import block_slice, cholesky_unit, reconstruct, solve_riccati
from mgig_lab.core.random_core import (
    RngStream,
    gig_log_density,
    mvn_precision_log_density,
    wishart_log_density,
)
from mgig_lab.samplers.mgig import (
    ModeCache,
    canonicalize,
    cond_a_params,
    cond_b_params,
    gibbs_step,
    hr_direction,
    hr_log_ratio,
    hr_propose,
    hr_step,
    invert_params,
    log_density_unnorm,
    log_exp_jacobian,
    log_joint_cholesky,
    mh1_log_ratio,
    mh1_proposal,
    mh1_step,
    mh2_log_ratio,
    mh2_proposal,
    mh2_step,
)
from mgig_lab.utils.type_definitions import CholeskyFactors, MgigParams
from tests.conftest import random_params, random_spd

SLICE_TOL = 1e-8


class TestDensity(unittest.TestCase):
    def test_scalar_density(self) -> None:
        params = MgigParams(2.0, np.array([[3.0]]), np.array([[4.0]]))
        expected = 2.0 * math.log(2.0) - 0.5 * (3.0 * 2.0 + 4.0 / 2.0)
        self.assertAlmostEqual(log_density_unnorm(np.array([[2.0]]), params), expected)

    def test_errors(self) -> None:
        params = MgigParams(1.0, np.eye(2), np.eye(2))
        with self.assertRaises(DimMismatchError):
            log_density_unnorm(np.eye(3), params)
        with self.assertRaises(NotSpdError):
            log_density_unnorm(np.diag([1.0, -1.0]), params)
        with self.assertRaises(DimMismatchError):
            MgigParams(1.0, np.eye(2), np.eye(3))

    def test_inversion_property(self) -> None:
        gen = np.random.default_rng(1)
        params = random_params(gen, 3)
        inverted = invert_params(params)
        self.assertAlmostEqual(inverted.lambda_, -params.lambda_ - 4.0)
        np.testing.assert_allclose(inverted.psi, params.gamma)
        # log f(Σ) - log g(Σ⁻¹) is constant up to the Jacobian |Σ|^{-(p+1)}.
        offsets = []
        for _ in range(4):
            sigma = random_spd(gen, 3)
            sign, logdet = np.linalg.slogdet(sigma)
            offsets.append(
                log_density_unnorm(sigma, params)
                - log_density_unnorm(np.linalg.inv(sigma), inverted)
                + 4.0 * logdet
            )
        self.assertLess(max(offsets) - min(offsets), 1e-9)

    def test_canonicalize(self) -> None:
        low = MgigParams(-5.0, np.eye(3), 2.0 * np.eye(3))
        moved, flipped = canonicalize(low)
        self.assertTrue(flipped)
        self.assertAlmostEqual(moved.lambda_, 1.0)
        same, flipped = canonicalize(MgigParams(0.0, np.eye(3), np.eye(3)))
        self.assertFalse(flipped)
        self.assertEqual(same.lambda_, 0.0)


class TestConditionals(unittest.TestCase):
    def setUp(self) -> None:
        self.gen = np.random.default_rng(314)

    def test_a_slice_constancy(self) -> None:
        for trial in range(100):
            p = int(self.gen.integers(2, 5))
            params = random_params(self.gen, p)
            b = self.gen.standard_normal(p * (p - 1) // 2)
            conds = cond_a_params(b, params)
            with self.subTest(trial=trial, p=p):
                diffs = []
                for _ in range(3):
                    a = self.gen.uniform(0.3, 3.0, size=p)
                    claimed = sum(gig_log_density(x, g) for x, g in zip(a, conds))
                    diffs.append(log_joint_cholesky(a, b, params) - claimed)
                self.assertLess(max(diffs) - min(diffs), SLICE_TOL)

    def test_b_slice_constancy(self) -> None:
        for trial in range(100):
            p = int(self.gen.integers(2, 5))
            params = random_params(self.gen, p)
            a = self.gen.uniform(0.3, 3.0, size=p)
            b = self.gen.standard_normal(p * (p - 1) // 2)
            for i in range(1, p):
                cond = cond_b_params(i, a, b, params)
                block = block_slice(p, i - 1)
                with self.subTest(trial=trial, p=p, i=i):
                    diffs = []
                    for _ in range(3):
                        moved = b.copy()
                        moved[block] = self.gen.standard_normal(p - i)
                        claimed = mvn_precision_log_density(moved[block], cond)
                        diffs.append(log_joint_cholesky(a, moved, params) - claimed)
                    self.assertLess(max(diffs) - min(diffs), SLICE_TOL)

    def test_scalar_a_conditional(self) -> None:
        params = MgigParams(2.0, np.array([[3.0]]), np.array([[5.0]]))
        (cond,) = cond_a_params(np.zeros(0), params)
        self.assertEqual((cond.nu, cond.a, cond.b), (3.0, 3.0, 5.0))

    def test_block_index_range(self) -> None:
        params = MgigParams(1.0, np.eye(3), np.eye(3))
        for i in (0, 3):
            with self.subTest(i=i):
                with self.assertRaises(IndexOutOfRangeError):
                    cond_b_params(i, np.ones(3), np.zeros(3), params)

    def test_gibbs_hook_matches_direct_conditionals(self) -> None:
        params = random_params(self.gen, 4)
        state = cholesky_unit(random_spd(self.gen, 4))
        seen = []

        def hook(k, cond, a, b):  # type: ignore[no-untyped-def]
            direct = cond_b_params(k + 1, a, b, params)
            np.testing.assert_allclose(cond.precision, direct.precision, rtol=1e-9, atol=1e-9)
            np.testing.assert_allclose(
                cond.precision_times_mean, direct.precision_times_mean, rtol=1e-9, atol=1e-9
            )
            seen.append(k)

        gibbs_step(state, params, RngStream(1), on_block=hook)
        self.assertEqual(seen, [0, 1, 2])


class TestKernels(unittest.TestCase):
    def setUp(self) -> None:
        self.gen = np.random.default_rng(27)
        self.params = MgigParams(2.0, np.diag([1.0, 2.0, 3.0]), np.eye(3))

    def test_gibbs_is_deterministic_and_valid(self) -> None:
        state = cholesky_unit(np.eye(3))
        one = gibbs_step(state, self.params, RngStream(5, 1))
        two = gibbs_step(state, self.params, RngStream(5, 1))
        np.testing.assert_array_equal(one.a, two.a)
        np.testing.assert_array_equal(one.b, two.b)
        self.assertTrue(np.all(one.a > 0))
        reconstruct(one)

    def test_gibbs_scalar(self) -> None:
        params = MgigParams(1.0, np.eye(1), np.eye(1))
        out = gibbs_step(CholeskyFactors(np.ones(1), np.zeros(0)), params, RngStream(2))
        self.assertEqual(out.b.shape, (0,))
        self.assertGreater(float(out.a[0]), 0.0)

    def test_mh1_identity_proposal_is_accepted(self) -> None:
        sigma = random_spd(self.gen, 3)
        self.assertEqual(mh1_log_ratio(sigma, sigma, self.params), 0.0)
        step = mh1_step(sigma, self.params, RngStream(3), proposal=sigma)
        self.assertTrue(step.accepted)
        self.assertEqual(step.log_accept_prob, 0.0)

    def test_mh1_forced_proposals(self) -> None:
        old = np.eye(3)
        better = 4.0 * np.eye(3)  # larger Σ, smaller tr ΓΣ⁻¹
        self.assertGreater(mh1_log_ratio(old, better, self.params), 0.0)
        self.assertTrue(mh1_step(old, self.params, RngStream(3), proposal=better).accepted)
        worse = 1e-3 * np.eye(3)
        step = mh1_step(old, self.params, RngStream(3), proposal=worse)
        self.assertFalse(step.accepted)
        np.testing.assert_array_equal(step.sigma, old)
        self.assertLess(step.log_ratio, -1000.0)

    def test_mh1_ratio_is_target_over_proposal(self) -> None:
        proposal = mh1_proposal(self.params)
        self.assertEqual(proposal.dof, 2.0 * 2.0 + 3.0 + 1.0)
        np.testing.assert_allclose(proposal.scale, np.linalg.inv(self.params.psi), atol=1e-14)
        for trial in range(25):
            old, new = random_spd(self.gen, 3), random_spd(self.gen, 3)
            expected = (
                log_density_unnorm(new, self.params)
                - log_density_unnorm(old, self.params)
                - wishart_log_density(new, proposal.dof, proposal.scale)
                + wishart_log_density(old, proposal.dof, proposal.scale)
            )
            with self.subTest(trial=trial):
                got = mh1_log_ratio(old, new, self.params)
                self.assertAlmostEqual(got, expected, delta=1e-10 * max(1.0, abs(expected)))
                step = mh1_step(old, self.params, RngStream(trial), proposal=new)
                self.assertAlmostEqual(step.log_accept_prob, min(0.0, got), places=12)

    def test_wishart_kernels_need_lambda_above_minus_one(self) -> None:
        low = MgigParams(-1.0, np.eye(2), np.eye(2))
        with self.assertRaises(LambdaTooSmallError):
            mh1_proposal(low)
        with self.assertRaises(LambdaTooSmallError):
            mh2_step(np.eye(2), low, 5.0, RngStream(1))

    def test_mh2_proposal_mode(self) -> None:
        cache = ModeCache()
        proposal = mh2_proposal(self.params, 5.0, cache)
        mode = solve_riccati(2.0, self.params.psi, self.params.gamma)
        self.assertEqual(proposal.dof, 9.0)
        np.testing.assert_allclose((proposal.dof - 4.0) * proposal.scale, mode, atol=1e-12)
        mh2_proposal(self.params, 1.0, cache)
        self.assertEqual(len(cache), 1)

    def test_mh2_ratio_is_target_over_proposal(self) -> None:
        proposal = mh2_proposal(self.params, 5.0)
        old, new = random_spd(self.gen, 3), random_spd(self.gen, 3)
        expected = (
            log_density_unnorm(new, self.params)
            - log_density_unnorm(old, self.params)
            - wishart_log_density(new, proposal.dof, proposal.scale)
            + wishart_log_density(old, proposal.dof, proposal.scale)
        )
        self.assertAlmostEqual(mh2_log_ratio(old, new, self.params, proposal), expected)
        step = mh2_step(old, self.params, 5.0, RngStream(4), proposal=old)
        self.assertTrue(step.accepted)

    def test_exp_jacobian(self) -> None:
        self.assertAlmostEqual(log_exp_jacobian(np.eye(3)), 0.0)
        d = np.array([2.0, 0.5])
        expected = math.log(2.0) + math.log(0.5) + math.log((2.0 - 0.5) / math.log(4.0))
        self.assertAlmostEqual(log_exp_jacobian(np.diag(d)), expected)
        # coincident eigenvalues take the limit d
        self.assertAlmostEqual(log_exp_jacobian(3.0 * np.eye(2)), 3.0 * math.log(3.0))

    def test_hr_direction_and_step(self) -> None:
        rng = RngStream(6)
        direction = hr_direction(3, rng)
        np.testing.assert_allclose(direction, direction.T)
        sigma = random_spd(self.gen, 3)
        self.assertEqual(hr_log_ratio(sigma, sigma, self.params), 0.0)
        zero = np.zeros((3, 3))
        np.testing.assert_allclose(hr_propose(sigma, zero), sigma, atol=1e-10)
        step = hr_step(sigma, self.params, RngStream(6), direction=zero)
        self.assertTrue(step.accepted)

    def test_hr_ratio_is_antisymmetric(self) -> None:
        for trial in range(100):
            a, b = random_spd(self.gen, 3), random_spd(self.gen, 3)
            forward = hr_log_ratio(a, b, self.params)
            backward = hr_log_ratio(b, a, self.params)
            with self.subTest(trial=trial):
                tol = 1e-10 * max(1.0, abs(forward))
                self.assertAlmostEqual(forward + backward, 0.0, delta=tol)

    def test_kernels_keep_spd_state(self) -> None:
        sigma = np.eye(3)
        rng = RngStream(8)
        for _ in range(50):
            sigma = mh1_step(sigma, self.params, rng).sigma
            sigma = mh2_step(sigma, self.params, 5.0, rng).sigma
            sigma = hr_step(sigma, self.params, rng).sigma
        self.assertTrue(np.all(np.linalg.eigvalsh(sigma) > 0))


if __name__ == "__main__":
    unittest.main()
