import numpy as np
import pytest
from numpy.testing import assert_allclose

from mdiscord import (
    MeasParams,
    apply_tree,
    dense_grid_min,
    identity_suite,
    invariance_residual,
    reference_objective,
    tree_from_params,
    verification_suite,
)
from mdiscord.discord import _MeasuredEntropyObjective
from mdiscord.states import bell_state, ghz_state, product_state

from conftest import random_qubits, random_tree


class TestReferenceObjective:
    @pytest.mark.parametrize("seed", range(25))
    def test_agrees_with_production_objective(self, seed):
        state = random_qubits(seed, 3, 1 + seed % 8)
        rng = np.random.default_rng(2000 + seed)
        flat = np.stack(
            [rng.uniform(0, np.pi / 2, 3), rng.uniform(0, 2 * np.pi, 3)], 1
        ).ravel()
        tree = tree_from_params((2, 2, 2), (0, 1), MeasParams.from_flat(flat))
        assert_allclose(
            reference_objective(state, tree),
            _MeasuredEntropyObjective(state, 3)(flat),
            atol=1e-10,
        )

    def test_product_state_vanishes_on_grid_trees(self):
        state = product_state()
        thetas = np.linspace(0, np.pi / 2, 4)
        phis = np.linspace(0, 2 * np.pi, 4, endpoint=False)
        for ti in (0, 2, 3):
            for pi_ in (0, 1):
                flat = np.array([thetas[ti], phis[pi_], thetas[3 - ti], phis[pi_],
                                 thetas[ti], phis[(pi_ + 2) % 4]])
                tree = tree_from_params((2, 2, 2), (0, 1), MeasParams.from_flat(flat))
                assert abs(reference_objective(state, tree)) < 1e-12


class TestDenseGridMin:
    def test_bell_at_fifty_points(self):
        value = dense_grid_min(bell_state(), level=2, points_per_angle=50)
        assert_allclose(value, 1.0, atol=2e-3)

    def test_measured_state_on_grid(self):
        # the generating angles sit on the 8-point grid, so zero is attained
        thetas = np.linspace(0, np.pi / 2, 8)
        phis = np.linspace(0, 2 * np.pi, 8, endpoint=False)
        flat = np.array([thetas[2], phis[3], thetas[5], phis[1], thetas[1], phis[6]])
        tree = tree_from_params((2, 2, 2), (0, 1), MeasParams.from_flat(flat))
        measured, _ = apply_tree(random_qubits(7, 3, 5), tree, 2)
        assert dense_grid_min(measured, level=3, points_per_angle=8) < 1e-6

    def test_product_state_is_zero_everywhere(self):
        value = dense_grid_min(product_state(), level=3, points_per_angle=4)
        assert abs(value) < 1e-12

    def test_ghz_at_modest_density(self):
        value = dense_grid_min(ghz_state(), level=3, points_per_angle=6)
        assert_allclose(value, 1.0, atol=1e-9)


class TestInvarianceResidual:
    def test_measured_state_with_generating_tree(self):
        tree = random_tree(90, 2)
        measured, _ = apply_tree(random_qubits(4, 3, 6), tree, 2)
        assert invariance_residual(measured, tree) < 1e-12

    def test_bell_z_coherences(self, bell, z_tree_2q):
        # the Bell off-diagonal entries of magnitude 1/2 are destroyed
        two_level = tree_from_params((2, 2), (0, 1), MeasParams(((0.0, 0.0),) * 3))
        assert_allclose(invariance_residual(bell, two_level), 0.5, atol=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_non_negative(self, seed):
        state = random_qubits(seed, 3, 1 + seed % 8)
        assert invariance_residual(state, random_tree(seed, 2)) >= 0.0


class TestIdentitySuite:
    def test_all_identities_pass(self):
        reports = identity_suite(seed=0, samples=40)
        assert len(reports) == 6
        for report in reports:
            assert report.passed, report
            assert report.samples == 40
            assert report.max_violation < 1e-9

    def test_deterministic(self):
        first = identity_suite(seed=3, samples=10)
        second = identity_suite(seed=3, samples=10)
        assert first == second


class TestVerificationSuite:
    def test_everything_passes(self):
        reports = verification_suite(seed=0, samples=25)
        names = [report.name for report in reports]
        assert names == sorted(names)
        assert {"eigenbasis_tree_invariance", "objective_non_negativity",
                "cross_implementation_objective"} < set(names)
        for report in reports:
            assert report.passed, report
