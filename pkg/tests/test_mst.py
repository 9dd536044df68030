#!/usr/bin/env python3
"""
Tests for the matrix skew-t Wishart mixture sampler.
"""

import math
import unittest

import numpy as np

from mgig_lab.core.exceptions import (
    DimMismatchError,
    EmptyChainError,
    InvalidDofError,
    InvalidParamsError,
)
from mgig_lab.core.random_core import (
    RngStream,
    inverse_wishart_log_density,
    mvn_precision_log_density,
    wishart_log_density,
)
from mgig_lab.models.mst import (
    LOSS_RAO_BLACKWELL,
    PSI_RESCALE,
    MstData,
    MstHyper,
    MstState,
    initial_mst_state,
    mst_conditionals,
    mst_gibbs_step,
    mst_log_joint,
    predictive_loss,
    run_mst_chain,
    sample_psi_unit_corner,
    simulate_mst,
    vec,
    w_inverse_conditional,
)
from mgig_lab.samplers.mgig import log_density_unnorm
from mgig_lab.utils.type_definitions import SamplerKind, WishartParams
from tests.conftest import random_spd, standard_error

SLICE_TOL = 1e-7


def _setup(gen: np.random.Generator, p: int = 2, q: int = 3, n: int = 4):
    hyper = MstHyper.default(p, q, nu=6.0)
    data = MstData(gen.standard_normal((n, p, q)))
    state = MstState(
        m=gen.standard_normal((p, q)),
        b=gen.standard_normal((p, q)),
        psi=random_spd(gen, p),
        omega=random_spd(gen, q),
        w=[random_spd(gen, p) for _ in range(n)],
    )
    return data, hyper, state


class TestConditionals(unittest.TestCase):
    def setUp(self) -> None:
        self.gen = np.random.default_rng(77)

    def _assert_constant(self, diffs) -> None:  # type: ignore[no-untyped-def]
        self.assertLess(max(diffs) - min(diffs), SLICE_TOL)

    def test_w_inverse_slice(self) -> None:
        data, hyper, state = _setup(self.gen)
        p = data.p
        for i in range(data.n):
            cond = w_inverse_conditional(i, state, data, hyper)
            self.assertFalse(cond.degenerate)
            self.assertAlmostEqual(cond.lambda_, (6.0 + 3 - 2 - 1) / 2.0)
            params = cond.to_params()
            with self.subTest(i=i):
                diffs = []
                for _ in range(3):
                    w = random_spd(self.gen, p)
                    state.w[i] = w
                    _, logdet = np.linalg.slogdet(w)
                    diffs.append(
                        mst_log_joint(state, data, hyper)
                        - log_density_unnorm(np.linalg.inv(w), params)
                        + (p + 1) * logdet
                    )
                self._assert_constant(diffs)

    def test_location_and_skewness_slices(self) -> None:
        data, hyper, state = _setup(self.gen)
        for name in ("m", "b"):
            # B's conditional depends on M, so each block is evaluated afresh
            cond = getattr(mst_conditionals(state, data, hyper), name)
            with self.subTest(block=name):
                diffs = []
                for _ in range(3):
                    value = self.gen.standard_normal((data.p, data.q))
                    setattr(state, name, value)
                    diffs.append(
                        mst_log_joint(state, data, hyper)
                        - mvn_precision_log_density(vec(value), cond)
                    )
                self._assert_constant(diffs)

    def test_psi_slice(self) -> None:
        data, hyper, state = _setup(self.gen)
        cond = mst_conditionals(state, data, hyper).psi
        self.assertEqual(cond.dof, hyper.eta0 + data.n * hyper.nu)
        diffs = []
        for _ in range(3):
            state.psi = random_spd(self.gen, data.p)
            diffs.append(
                mst_log_joint(state, data, hyper)
                - wishart_log_density(state.psi, cond.dof, cond.scale)
            )
        self._assert_constant(diffs)

    def test_omega_slice(self) -> None:
        data, hyper, state = _setup(self.gen)
        cond = mst_conditionals(state, data, hyper).omega
        self.assertEqual(cond.dof, hyper.xi0 + data.n * data.p)
        diffs = []
        for _ in range(3):
            state.omega = random_spd(self.gen, data.q)
            diffs.append(
                mst_log_joint(state, data, hyper)
                - inverse_wishart_log_density(state.omega, cond.dof, cond.scale)
            )
        self._assert_constant(diffs)

    def test_rank_deficient_skewness_is_flagged(self) -> None:
        data, hyper, state = _setup(self.gen, p=3, q=1)
        cond = w_inverse_conditional(0, state, data, hyper)
        self.assertTrue(cond.degenerate)
        self.assertEqual(cond.rank, 1)
        state.b = np.zeros((3, 1))
        cond = w_inverse_conditional(0, state, data, hyper)
        self.assertEqual(cond.rank, 0)


class TestPsiConstraint(unittest.TestCase):
    def test_unit_corner_draws(self) -> None:
        gen = np.random.default_rng(3)
        scale = random_spd(gen, 3)
        params = WishartParams(8.0, scale)
        rng = RngStream(4)
        draws = np.array([sample_psi_unit_corner(params, rng) for _ in range(4000)])
        np.testing.assert_array_equal(draws[:, 0, 0], np.ones(4000))
        for draw in draws[:10]:
            self.assertTrue(np.all(np.linalg.eigvalsh(draw) > 0))
        expected = scale[1:, 0] / scale[0, 0]
        err = np.abs(draws[:, 1:, 0].mean(axis=0) - expected)
        self.assertTrue(np.all(err < 4 * standard_error(draws[:, 1:, 0])))
        np.testing.assert_array_equal(
            sample_psi_unit_corner(WishartParams(3.0, np.eye(1)), rng), np.ones((1, 1))
        )

    def test_both_constraints_pin_the_corner(self) -> None:
        gen = np.random.default_rng(5)
        data, hyper, state = _setup(gen)
        for constraint in ("conditional", PSI_RESCALE):
            with self.subTest(constraint=constraint):
                new = mst_gibbs_step(
                    state, data, hyper, SamplerKind.gs(), RngStream(6), constraint
                )
                self.assertAlmostEqual(float(new.psi[0, 0]), 1.0)
        with self.assertRaises(InvalidParamsError):
            mst_gibbs_step(state, data, hyper, SamplerKind.gs(), RngStream(6), "free")


class TestGibbsAndChains(unittest.TestCase):
    def setUp(self) -> None:
        self.rng = RngStream(21)
        self.sim = simulate_mst(
            np.zeros((2, 2)), 2.0 * np.ones((2, 2)), np.eye(2), np.eye(2), 5.0, 12, self.rng
        )
        self.hyper = MstHyper.default(2, 2, 5.0)

    def test_simulation_shapes(self) -> None:
        self.assertEqual(self.sim.data.y.shape, (12, 2, 2))
        self.assertEqual(len(self.sim.w), 12)
        with self.assertRaises(InvalidDofError):
            simulate_mst(np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2), np.eye(2), 0.5, 3, self.rng)
        with self.assertRaises(DimMismatchError):
            simulate_mst(
                np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2), np.eye(2), 5.0, 2, self.rng,
                w=[np.eye(2)],
            )

    def test_hyper_defaults(self) -> None:
        np.testing.assert_array_equal(self.hyper.u0m, 100.0 * np.eye(2))
        self.assertEqual((self.hyper.eta0, self.hyper.xi0), (3.0, 4.0))
        with self.assertRaises(InvalidParamsError):
            MstHyper.default(3, 2, nu=1.0)

    def test_every_w_kernel_keeps_state_valid(self) -> None:
        state = initial_mst_state(self.sim.data)
        for kind in (SamplerKind.gs(), SamplerKind.mh1(), SamplerKind.hr()):
            with self.subTest(kind=kind.label):
                new = mst_gibbs_step(state, self.sim.data, self.hyper, kind, RngStream(2))
                for w in new.w:
                    self.assertTrue(np.all(np.linalg.eigvalsh(w) > 0))
                self.assertTrue(np.all(np.linalg.eigvalsh(new.omega) > 0))
        with self.assertRaises(InvalidParamsError):
            mst_gibbs_step(state, self.sim.data, self.hyper, SamplerKind.mh2(), RngStream(2))

    def test_zero_skewness_route(self) -> None:
        # B = 0 makes every W conditional singular; the Wishart branch handles it
        state = initial_mst_state(self.sim.data)
        new = mst_gibbs_step(
            state, self.sim.data, self.hyper, SamplerKind.gs(), RngStream(3), fit_skewness=False
        )
        np.testing.assert_array_equal(new.b, np.zeros((2, 2)))

    def test_empty_data_samples_the_prior(self) -> None:
        empty = simulate_mst(
            np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2), np.eye(2), 5.0, 0, self.rng
        )
        self.assertEqual(empty.data.n, 0)
        run = run_mst_chain(empty.data, self.hyper, SamplerKind.gs(), 12, 2, 1, RngStream(4))
        self.assertEqual(len(run.states), 10)
        self.assertEqual(predictive_loss(run.states, empty.data, RngStream(5)), 0.0)

    def test_run_chain(self) -> None:
        run = run_mst_chain(self.sim.data, self.hyper, SamplerKind.hr(), 15, 5, 1, RngStream(7))
        self.assertEqual(len(run.states), 10)
        self.assertEqual(sorted(run.ess), ["b", "m", "omega"])
        mt = run_mst_chain(
            self.sim.data, self.hyper, SamplerKind.gs(), 15, 5, 1, RngStream(7), fit_skewness=False
        )
        self.assertTrue(math.isnan(mt.ess["b"]))
        with self.assertRaises(InvalidParamsError):
            run_mst_chain(self.sim.data, self.hyper, SamplerKind.gs(), 5, 5, 1, RngStream(7))

    def test_determinism(self) -> None:
        one = run_mst_chain(self.sim.data, self.hyper, SamplerKind.gs(), 6, 1, 1, RngStream(8))
        two = run_mst_chain(self.sim.data, self.hyper, SamplerKind.gs(), 6, 1, 1, RngStream(8))
        np.testing.assert_array_equal(one.states[-1].omega, two.states[-1].omega)
        np.testing.assert_array_equal(one.states[-1].b, two.states[-1].b)


class TestPredictiveLoss(unittest.TestCase):
    def setUp(self) -> None:
        rng = RngStream(31)
        self.sim = simulate_mst(
            np.zeros((2, 2)), np.ones((2, 2)), np.eye(2), np.eye(2), 6.0, 8, rng
        )
        hyper = MstHyper.default(2, 2, 6.0)
        self.states = run_mst_chain(
            self.sim.data, hyper, SamplerKind.gs(), 14, 4, 1, RngStream(32)
        ).states

    def test_rao_blackwell_ignores_state_order(self) -> None:
        forward = predictive_loss(self.states, self.sim.data, RngStream(1), LOSS_RAO_BLACKWELL)
        backward = predictive_loss(
            self.states[::-1], self.sim.data, RngStream(2), LOSS_RAO_BLACKWELL
        )
        self.assertAlmostEqual(forward, backward, places=8)
        self.assertGreater(forward, 0.0)

    def test_replicates_are_reproducible(self) -> None:
        one = predictive_loss(self.states, self.sim.data, RngStream(3))
        two = predictive_loss(self.states, self.sim.data, RngStream(3))
        self.assertEqual(one, two)
        self.assertGreater(one, 0.0)

    def test_errors(self) -> None:
        with self.assertRaises(EmptyChainError):
            predictive_loss([], self.sim.data, RngStream(1))
        with self.assertRaises(InvalidParamsError):
            predictive_loss(self.states, self.sim.data, RngStream(1), "other")


if __name__ == "__main__":
    unittest.main()
