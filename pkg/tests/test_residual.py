"""Residual measures: closed forms, the minimization oracle, and the attainment check."""

import math

import numpy as np
import pytest
from conftest import density, random_pair, rotate

import uresidual as ur
from uresidual.spectral import hermitian_part

RNG = np.random.default_rng

P = np.array([0.3, 0.7])
Q = np.array([0.5, 0.5])
BURES_COMMUTING = 0.205758423033744
PETZ2_CLASSICAL = 0.17435338714477774
KL_CLASSICAL = 0.08717669357238891


class TestClosedForms:
    def test_bures_identity(self):
        assert ur.residual_bures(P, P) == 0.0

    def test_bures_analytic_quarter_pi(self):
        assert abs(ur.residual_bures([0.0, 1.0], Q) - math.pi / 4) < 1e-12

    def test_bures_scalar_formula(self):
        got = ur.residual_bures(P, Q)
        oracle = math.acos(math.sqrt(0.15) + math.sqrt(0.35))
        assert abs(got - oracle) < 1e-12
        assert abs(got - BURES_COMMUTING) < 1e-12

    def test_trace_identity(self):
        assert ur.residual_trace(Q, Q) == 0.0

    def test_trace_half(self):
        assert abs(ur.residual_trace([0.0, 1.0], Q) - 0.5) < 1e-15

    def test_renyi_identity(self):
        assert abs(ur.residual_renyi(P, P, 2.0)) < 1e-12

    def test_renyi_alpha_two(self):
        assert abs(ur.residual_renyi(Q, P, 2.0) - PETZ2_CLASSICAL) < 1e-12

    def test_renyi_continuity_to_kl(self):
        rng = RNG(1)
        for trial in range(30):
            p = ur.random_density(3, 3, rng).spectrum()
            q = ur.random_density(3, 3, rng).spectrum()
            ref = ur.residual_kl(p, q)
            for alpha in (1.0 - 1e-4, 1.0 + 1e-4):
                assert abs(ur.residual_renyi(p, q, alpha) - ref) < 1e-3, f"trial {trial}"

    def test_kl_identity(self):
        assert ur.residual_kl(Q, Q) == 0.0

    def test_kl_value(self):
        assert abs(ur.residual_kl(Q, P) - KL_CLASSICAL) < 1e-12

    def test_kl_support_rule(self):
        assert math.isinf(ur.residual_kl([0.5, 0.5], [0.0, 1.0]))
        assert math.isfinite(ur.residual_kl([0.0, 1.0], [0.5, 0.5]))

    def test_renyi_support_rules(self):
        assert math.isinf(ur.residual_renyi([0.5, 0.5], [0.0, 1.0], 2.0))
        assert math.isfinite(ur.residual_renyi([0.5, 0.5], [0.0, 1.0], 0.5))
        assert math.isinf(ur.residual_renyi([1.0, 0.0], [0.0, 1.0], 0.5))

    def test_rejects_non_probability(self):
        with pytest.raises(ValueError, match="sum to 1"):
            ur.residual_bures([0.3, 0.6], Q)
        with pytest.raises(ValueError, match="negative"):
            ur.residual_trace([-0.1, 1.1], Q)

    def test_dispatch(self):
        assert ur.residual_measure(ur.BURES_ANGLE, P, Q) == ur.residual_bures(P, Q)
        assert ur.residual_measure(ur.TRACE_DISTANCE, P, Q) == ur.residual_trace(P, Q)
        assert ur.residual_measure(ur.RELATIVE_ENTROPY, P, Q) == ur.residual_kl(P, Q)
        assert ur.residual_measure(ur.petz_renyi_kind(2.0), P, Q) == ur.residual_renyi(P, Q, 2.0)


class TestMetricAxiomsOnSpectra:
    def test_symmetry_and_identity(self):
        rng = RNG(3)
        for _ in range(50):
            p = ur.random_density(4, 4, rng).spectrum()
            q = ur.random_density(4, 4, rng).spectrum()
            assert abs(ur.residual_bures(p, q) - ur.residual_bures(q, p)) < 1e-12
            assert abs(ur.residual_trace(p, q) - ur.residual_trace(q, p)) < 1e-15
            assert ur.residual_bures(p, p) < 1e-7
            assert ur.residual_trace(p, p) == 0.0

    def test_zero_iff_equal_spectra(self):
        p = np.array([0.2, 0.8])
        q = np.array([0.2000001, 0.7999999])
        assert ur.residual_trace(p, q) > 0
        assert ur.residual_bures(p, q) > 0

    def test_triangle(self):
        rng = RNG(5)
        for trial in range(100):
            p, q, c = (ur.random_density(3, 3, rng).spectrum() for _ in range(3))
            for fn in (ur.residual_bures, ur.residual_trace):
                slack = fn(p, c) + fn(c, q) - fn(p, q)
                assert slack >= -1e-10, f"trial {trial}: {fn.__name__} slack {slack}"


class TestQuotientInequality:
    @pytest.mark.parametrize(
        "kind",
        [ur.BURES_ANGLE, ur.TRACE_DISTANCE, ur.petz_renyi_kind(2.0),
         ur.petz_renyi_kind(0.5), ur.RELATIVE_ENTROPY],
        ids=lambda k: k.label(),
    )
    def test_residual_below_divergence(self, kind):
        rng = RNG(7)
        for trial in range(80):
            dim = int(rng.integers(2, 5))
            rho, sigma = random_pair(dim, rng)
            d = ur.divergence(kind, rho, sigma)
            r = ur.residual_measure(kind, rho.spectrum(), sigma.spectrum())
            assert r <= d + 1e-9, f"trial {trial}: residual {r} > divergence {d}"

    def test_class_invariance_end_to_end(self):
        rng = RNG(9)
        rho, sigma = random_pair(3, rng)
        u = ur.random_haar_unitary(3, rng).mat
        v = ur.random_haar_unitary(3, rng).mat
        rho_u = density(hermitian_part(rotate(rho.mat, u)))
        sigma_v = density(hermitian_part(rotate(sigma.mat, v)))
        a = ur.residual_bures(rho.spectrum(), sigma.spectrum())
        b = ur.residual_bures(rho_u.spectrum(), sigma_v.spectrum())
        assert abs(a - b) < 1e-9


class TestRearrangement:
    def test_sorted_pairing_is_maximal(self):
        rng = RNG(11)
        for trial in range(200):
            dim = int(rng.integers(2, 6))
            p = ur.random_density(dim, dim, rng).spectrum().values
            q = ur.random_density(dim, dim, rng).spectrum().values
            pi = rng.permutation(dim)
            shuffled = float(np.sum(np.sqrt(p * q[pi])))
            sorted_sum = float(np.sum(np.sqrt(p * q)))
            assert shuffled <= sorted_sum + 1e-12, f"trial {trial}"

    def test_doubly_stochastic_overlap(self):
        rng = RNG(13)
        for trial in range(50):
            dim = int(rng.integers(2, 5))
            rho, sigma = random_pair(dim, rng)
            u = ur.random_haar_unitary(dim, rng).mat
            vp = ur.eigendecompose(rho.op).vectors
            vq = ur.eigendecompose(sigma.op).vectors
            overlap = np.abs(vq.conj().T @ u @ vp) ** 2  # (j, i) = |<q_j|U|p_i>|^2
            np.testing.assert_allclose(overlap.sum(axis=0), np.ones(dim), atol=1e-10)
            np.testing.assert_allclose(overlap.sum(axis=1), np.ones(dim), atol=1e-10)

    def test_monotone_function_trace_bound(self):
        rng = RNG(15)
        pairs = [(lambda x: x, lambda x: x), (np.sqrt, np.square), (np.square, np.sqrt)]
        for trial in range(60):
            dim = int(rng.integers(2, 5))
            rho, sigma = random_pair(dim, rng)
            u = ur.random_haar_unitary(dim, rng).mat
            p, q = rho.spectrum().values, sigma.spectrum().values
            g, h = pairs[trial % len(pairs)]
            vq = ur.eigendecompose(sigma.op).vectors
            vp = ur.eigendecompose(rho.op).vectors
            rotated = u @ vp  # eigenbasis of U rho U^dag
            g_mat = (rotated * g(p)) @ rotated.conj().T
            h_mat = (vq * h(q)) @ vq.conj().T
            lhs = float(np.trace(g_mat @ h_mat).real)
            rhs = float(np.sum(g(p) * h(q)))
            assert lhs <= rhs + 1e-10, f"trial {trial}: {lhs} > {rhs}"


class TestCommutingRepresentatives:
    def test_shared_eigenbasis(self):
        rng = RNG(17)
        rho, sigma = random_pair(3, rng)
        rep_p, rep_q = ur.commuting_representatives(rho, sigma)
        comm = rep_p.mat @ rep_q.mat - rep_q.mat @ rep_p.mat
        assert np.linalg.norm(comm) < 1e-12
        np.testing.assert_allclose(rep_p.spectrum().values, rho.spectrum().values, atol=1e-10)
        np.testing.assert_allclose(rep_q.spectrum().values, sigma.spectrum().values, atol=1e-10)


class TestCheckAssumption:
    @pytest.mark.parametrize(
        "kind",
        [ur.BURES_ANGLE, ur.TRACE_DISTANCE, ur.petz_renyi_kind(2.0), ur.RELATIVE_ENTROPY],
        ids=lambda k: k.label(),
    )
    def test_holds_on_random_pairs(self, kind):
        rng = RNG(19)
        for trial in range(30):
            dim = int(rng.integers(2, 5))
            rho, sigma = random_pair(dim, rng)
            assert ur.check_assumption(kind, rho, sigma), f"trial {trial}"


class TestMinimizeOverUnitaries:
    def test_identical_states_give_zero(self):
        rho = ur.random_density(2, 2, RNG(21))
        result = ur.minimize_over_unitaries(ur.TRACE_DISTANCE, rho, rho, seed=0)
        assert result.value < 1e-6
        assert result.converged

    def test_commuting_diagonal_pair_trace(self):
        result = ur.minimize_over_unitaries(ur.TRACE_DISTANCE, density(P), density(Q), seed=1)
        assert abs(result.value - ur.residual_trace(P, Q)) < 1e-6

    def test_random_two_level_bures(self):
        rng = RNG(23)
        rho, sigma = random_pair(2, rng)
        closed = ur.residual_bures(rho.spectrum(), sigma.spectrum())
        result = ur.minimize_over_unitaries(ur.BURES_ANGLE, rho, sigma, seed=2)
        assert abs(result.value - closed) < 1e-6
        assert result.minimizer.dim == 2

    def test_oracle_agreement_small_batch(self):
        rng = RNG(25)
        kinds = [ur.BURES_ANGLE, ur.TRACE_DISTANCE, ur.petz_renyi_kind(2.0), ur.RELATIVE_ENTROPY]
        for trial in range(4):
            dim = 2 if trial % 2 == 0 else 3
            rho, sigma = random_pair(dim, rng)
            kind = kinds[trial % len(kinds)]
            closed = ur.residual_measure(kind, rho.spectrum(), sigma.spectrum())
            result = ur.minimize_over_unitaries(kind, rho, sigma, seed=rng)
            assert abs(result.value - closed) < 1e-5, f"trial {trial} {kind.label()}"

    def test_minimizer_achieves_value(self):
        rng = RNG(27)
        rho, sigma = random_pair(2, rng)
        result = ur.minimize_over_unitaries(ur.BURES_ANGLE, rho, sigma, seed=3)
        w = result.minimizer.mat
        moved = density(hermitian_part(rotate(rho.mat, w)))
        assert abs(ur.bures_angle(moved, sigma) - result.value) < 1e-9

    def test_rejects_large_dimension(self):
        rho = ur.random_density(9, 9, RNG(29))
        with pytest.raises(ValueError, match="dim <= 8"):
            ur.minimize_over_unitaries(ur.BURES_ANGLE, rho, rho)
