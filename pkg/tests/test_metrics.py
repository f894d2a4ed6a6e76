import math

import numpy as np
import pytest

from qrecon.exceptions import DomainError, SingularityError
from qrecon.metrics import (StateVector, Tangent, extended_fisher_metric,
                            extended_fisher_metric_recursive,
                            fisher_info_theta, fisher_info_theta_numeric,
                            fisher_matrix_numeric, fubini_study_distance,
                            fubini_study_metric, random_state, random_tangent)
from qrecon.probmodel import Distribution, factorize, reconstitute


def haar_unitary(size, rng):
    z = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestFisherInfoTheta:
    @pytest.mark.parametrize("theta", [math.pi / 4, math.pi / 2, 1.234])
    def test_analytic_value_is_one(self, theta):
        assert fisher_info_theta(theta) == 1.0

    def test_numeric_cross_check(self):
        for theta in np.linspace(0.3, math.pi - 0.3, 25):
            assert abs(fisher_info_theta_numeric(theta) - 1.0) < 1e-10

    def test_small_theta_extrapolation(self):
        # the numeric sum approaches 1 toward the boundary as well
        values = [fisher_info_theta_numeric(t, step=t * 1e-3)
                  for t in (0.2, 0.1, 0.05)]
        assert all(abs(v - 1.0) < 1e-5 for v in values)


class TestFisherMatrixNumeric:
    def test_single_bit_scalar(self):
        tree = factorize(Distribution([0.3, 0.7]))
        mat = fisher_matrix_numeric(tree)
        assert mat.shape == (1, 1)
        assert mat[0, 0] == pytest.approx(1.0, abs=1e-8)

    def test_uniform_two_bit_diagonal(self):
        tree = factorize(Distribution([0.25] * 4))
        mat = fisher_matrix_numeric(tree)
        assert np.allclose(mat, np.diag([1.0, 0.5, 0.5]), atol=1e-8)

    def test_diagonal_weights_are_suffix_masses(self):
        rng = np.random.default_rng(4)
        d = Distribution(rng.dirichlet(np.ones(8)))
        tree = factorize(d)
        mat = fisher_matrix_numeric(tree)
        off = mat - np.diag(np.diag(mat))
        assert np.abs(off).max() < 1e-8
        # the diagonal entry of node (l, s) is the mass of its suffix
        expected = []
        for level, suffix, _ in tree.nodes():
            width = 3 - level
            mask = (np.arange(8) & ((1 << width) - 1)) == suffix
            expected.append(d.probs[mask].sum())
        assert np.allclose(np.diag(mat), expected, atol=1e-8)

    def test_matches_expected_log_likelihood_hessian(self):
        rng = np.random.default_rng(8)
        d = Distribution(rng.dirichlet(np.ones(8)))
        tree = factorize(d)
        mat = fisher_matrix_numeric(tree)
        nodes = [(lev, suf, p0) for lev, suf, p0 in tree.nodes()]
        step = 1e-4

        def loglik(thetas):
            t = tree
            for (lev, suf, _), th in zip(nodes, thetas):
                t = t.with_node(lev, suf, math.cos(th / 2.0) ** 2)
            probs = reconstitute(t).probs
            return float(np.sum(d.probs * np.log(probs)))

        base = np.array([2.0 * math.acos(math.sqrt(p0)) for _, _, p0 in nodes])
        hess = np.empty((len(nodes), len(nodes)))
        for a in range(len(nodes)):
            for b in range(len(nodes)):
                t = base.copy()
                vals = []
                for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    t = base.copy()
                    t[a] += sa * step
                    t[b] += sb * step
                    vals.append(loglik(t))
                hess[a, b] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * step**2)
        assert np.abs(mat - (-hess)).max() < 1e-6

    def test_boundary_node_raises(self):
        tree = factorize(Distribution([1.0, 0.0]))
        with pytest.raises(SingularityError):
            fisher_matrix_numeric(tree)


class TestExtendedFisherMetric:
    def test_global_phase_costs_nothing(self):
        rng = np.random.default_rng(0)
        psi = random_state(3, rng)
        assert extended_fisher_metric(psi, Tangent(1j * 0.3 * psi.amps)) == \
            pytest.approx(0.0, abs=1e-12)

    def test_one_bit_chart_form(self):
        theta, alpha = 0.9, -0.7
        dtheta, dalpha = 0.13, 0.41
        psi = np.array([math.cos(theta / 2),
                        math.sin(theta / 2) * np.exp(1j * alpha)])
        dpsi = np.array([
            -math.sin(theta / 2) * dtheta / 2,
            (math.cos(theta / 2) * dtheta / 2
             + 1j * math.sin(theta / 2) * dalpha) * np.exp(1j * alpha),
        ])
        expected = dtheta**2 + math.sin(theta) ** 2 * dalpha**2
        assert extended_fisher_metric(psi, dpsi) == pytest.approx(expected, abs=1e-12)

    def test_equals_four_fubini_study(self):
        rng = np.random.default_rng(42)
        for _ in range(400):
            nbits = int(rng.integers(1, 7))
            psi = random_state(nbits, rng)
            tan = random_tangent(psi, rng)
            efm = extended_fisher_metric(psi, tan)
            assert efm == pytest.approx(4.0 * fubini_study_metric(psi, tan),
                                        rel=1e-10, abs=1e-12)

    def test_recursion_equals_closed_form(self):
        rng = np.random.default_rng(43)
        for _ in range(300):
            nbits = int(rng.integers(1, 7))
            psi = random_state(nbits, rng)
            tan = random_tangent(psi, rng)
            closed = extended_fisher_metric(psi, tan)
            rec = extended_fisher_metric_recursive(psi, tan)
            assert rec == pytest.approx(closed, rel=1e-9, abs=1e-12)

    def test_uniform_probabilities_pure_phase(self):
        size = 8
        rng = np.random.default_rng(5)
        dphi = rng.normal(size=size)
        psi = np.full(size, 1 / math.sqrt(size), dtype=complex)
        dpsi = 1j * psi * dphi
        expected = 4.0 * (np.sum(dphi**2) / size - (np.sum(dphi) / size) ** 2)
        assert extended_fisher_metric(psi, dpsi) == pytest.approx(expected, abs=1e-12)
        assert extended_fisher_metric_recursive(psi, dpsi) == pytest.approx(
            expected, abs=1e-9)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(6)
        psi = random_state(4, rng)
        tan = random_tangent(psi, rng)
        base_closed = extended_fisher_metric(psi, tan)
        base_rec = extended_fisher_metric_recursive(psi, tan)
        for _ in range(20):
            perm = rng.permutation(16)
            p_psi = StateVector(psi.amps[perm])
            p_tan = Tangent(tan.damps[perm])
            assert extended_fisher_metric(p_psi, p_tan) == pytest.approx(
                base_closed, abs=1e-12)
            assert extended_fisher_metric_recursive(p_psi, p_tan) == pytest.approx(
                base_rec, abs=1e-12)

    def test_zero_mass_component_contributes_nothing(self):
        psi = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
        dpsi = np.array([0.0, 0.0, 0.0, 0.0], dtype=complex)
        assert extended_fisher_metric(psi, dpsi) == 0.0

    def test_perturbing_a_dead_component_raises(self):
        psi = np.array([1.0, 0.0], dtype=complex)
        with pytest.raises(SingularityError):
            extended_fisher_metric(psi, np.array([0.0, 0.1 + 0.0j]))

    def test_norm_breaking_tangent_rejected(self):
        psi = np.array([0.6, 0.8], dtype=complex)
        with pytest.raises(DomainError):
            extended_fisher_metric(psi, 0.1 * psi)  # pure radial direction


class TestFubiniStudy:
    def test_gauge_direction_is_null(self):
        rng = np.random.default_rng(10)
        psi = random_state(3, rng)
        assert fubini_study_metric(psi, Tangent(1j * psi.amps * 1e-2)) == \
            pytest.approx(0.0, abs=1e-16)

    def test_orthonormal_tangent_has_unit_length(self):
        psi = np.zeros(4, dtype=complex)
        psi[0] = 1.0
        d = np.zeros(4, dtype=complex)
        d[1] = 1.0
        assert fubini_study_metric(psi, d) == pytest.approx(1.0, abs=1e-15)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            psi = random_state(3, rng)
            tan = random_tangent(psi, rng)
            u = haar_unitary(8, rng)
            before = fubini_study_metric(psi, tan)
            after = fubini_study_metric(u @ psi.amps, u @ tan.damps)
            assert after == pytest.approx(before, rel=1e-12, abs=1e-14)

    def test_zero_vector_rejected(self):
        with pytest.raises(DomainError):
            fubini_study_metric(np.zeros(2, dtype=complex), np.ones(2, dtype=complex))


class TestFubiniStudyDistance:
    def test_identical_states(self):
        psi = np.array([0.6, 0.8j])
        assert fubini_study_distance(psi, psi) == pytest.approx(0.0, abs=1e-8)

    def test_orthogonal_states(self):
        assert fubini_study_distance(np.array([1, 0j]), np.array([0, 1j])) == \
            pytest.approx(math.pi / 2)

    def test_equal_superposition(self):
        psi1 = np.array([1.0, 0.0], dtype=complex)
        psi2 = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)
        assert fubini_study_distance(psi1, psi2) == pytest.approx(math.pi / 4)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            a = random_state(2, rng)
            b = random_state(2, rng)
            u = haar_unitary(4, rng)
            assert fubini_study_distance(u @ a.amps, u @ b.amps) == pytest.approx(
                fubini_study_distance(a, b), abs=1e-10)


class TestTangent:
    def test_projected_tangent_preserves_norm(self):
        rng = np.random.default_rng(14)
        psi = random_state(3, rng)
        raw = rng.normal(size=8) + 1j * rng.normal(size=8)
        tan = Tangent.projected(psi, raw)
        assert tan.is_norm_preserving(psi)

    def test_state_vector_normalizes_small_drift(self):
        amps = np.ones(4, dtype=complex) / 2.0 * (1 + 1e-11)
        sv = StateVector(amps)
        assert float(np.vdot(sv.amps, sv.amps).real) == pytest.approx(1.0, abs=1e-14)

    def test_state_vector_rejects_large_drift(self):
        with pytest.raises(DomainError):
            StateVector(np.ones(4, dtype=complex))
