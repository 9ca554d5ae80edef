import math

import numpy as np
import pytest

from cvdistill import (
    DegenerateStateError,
    coherent_information,
    eof_quadrature_symmetric,
    fock_lossy_tmsv,
    fock_quadrature_symmetric,
    fock_relative_entropy,
    gaussian_relative_entropy,
    gree,
    log_negativity,
    loss_channel,
    ppt_separable,
    random_physical_state,
    reverse_coherent_information,
    standard_form,
    tmss,
    tmss_entropy,
    vn_entropy,
)
from cvdistill.ree import FockStateMatrix

from conftest import random_entangled_qsym, random_local_rotations


def fock_thermal_product(nu_a, nu_b, n_max):
    """Independent oracle: diagonal Fock matrix of two uncoupled thermal modes."""
    def probs(nu):
        nbar = (nu - 1.0) / 2.0
        n = np.arange(n_max + 1)
        if nbar == 0:
            p = np.zeros(n_max + 1)
            p[0] = 1.0
            return p
        q = nbar / (nbar + 1.0)
        return (1.0 - q) * q**n

    joint = np.outer(probs(nu_a), probs(nu_b)).reshape(-1)
    mat = np.diag(joint)
    return FockStateMatrix(mat, n_max, float(1.0 - joint.sum()), False)


class TestGaussianRelativeEntropy:
    def test_identical_states(self):
        for seed in range(20):
            V = random_physical_state(seed)
            assert gaussian_relative_entropy(V, V) == pytest.approx(0.0, abs=1e-9)

    def test_vacuum_vs_thermal_closed_form(self):
        got = gaussian_relative_entropy(np.eye(4), np.diag([3.0] * 4))
        assert got == pytest.approx(2 * np.log(2), abs=1e-12)

    def test_vacuum_vs_thermal_fock_oracle(self):
        got = gaussian_relative_entropy(np.eye(4), np.diag([3.0] * 4))
        rho1 = fock_thermal_product(1.0, 1.0, 40)
        rho2 = fock_thermal_product(3.0, 3.0, 40)
        assert got == pytest.approx(fock_relative_entropy(rho1, rho2), abs=1e-4)

    def test_lossy_pair_vs_closest_separable_fock_oracle(self):
        V1 = loss_channel(tmss(0.6), 0.5)
        result = gree(V1)
        W = result.closest_separable
        got = gaussian_relative_entropy(V1, W)
        p = standard_form(W)
        rho1 = fock_lossy_tmsv(0.6, 0.5, 30)
        rho2 = fock_quadrature_symmetric(p.m, p.n, (abs(p.c1) + abs(p.c2)) / 2, 30)
        assert got == pytest.approx(fock_relative_entropy(rho1, rho2), abs=1e-3)

    def test_nonnegative(self, rng):
        for _ in range(40):
            V1 = random_entangled_qsym(rng)
            V2 = random_entangled_qsym(rng)
            assert gaussian_relative_entropy(V1, V2) >= 0.0

    def test_boundary_second_argument(self):
        assert gaussian_relative_entropy(np.eye(4), tmss(0.5)) == math.inf
        assert gaussian_relative_entropy(tmss(0.5), tmss(0.5)) == 0.0


class TestGree:
    def test_separable_input(self):
        V = np.diag([2.0, 2.0, 1.5, 1.5])
        res = gree(V)
        assert res.gree_nats == 0.0
        assert np.array_equal(res.closest_separable, V)
        assert res.converged

    def test_pure_tmss_value(self):
        # frozen from the landscape scan cross-validated against the Fock
        # oracle; the Gaussian-restricted minimum sits strictly above the
        # entanglement entropy for pure states (closest separable state of a
        # pure state is non-Gaussian), see the decisions ledger
        res = gree(tmss(0.5))
        assert res.converged
        assert res.gree_nats == pytest.approx(0.734125, abs=2e-3)
        assert res.gree_nats >= tmss_entropy(0.5) - 1e-9

    def test_lossy_state_sits_in_the_ordering_chain(self):
        V = loss_channel(tmss(1.0), 0.1)
        res = gree(V)
        lo = max(coherent_information(V), reverse_coherent_information(V))
        hi = eof_quadrature_symmetric(V).eof_nats
        assert lo < res.gree_nats < hi

    def test_closest_state_is_separable(self, rng):
        for _ in range(10):
            V = random_entangled_qsym(rng)
            res = gree(V)
            assert ppt_separable(res.closest_separable)
            assert res.gree_nats >= 0.0

    def test_zero_iff_separable(self, rng):
        for _ in range(15):
            V = random_entangled_qsym(rng)
            assert gree(V).gree_nats > 1e-6
        for seed in range(15):
            V = random_physical_state(seed)
            if ppt_separable(V):
                assert gree(V).gree_nats == 0.0

    def test_rotation_invariance(self, rng):
        V = loss_channel(tmss(0.8), 0.4)
        base = gree(V).gree_nats
        for _ in range(4):
            S = random_local_rotations(rng)
            assert gree(S @ V @ S.T).gree_nats == pytest.approx(base, abs=1e-5)

    def test_chain_on_random_family(self, rng):
        checked = 0
        while checked < 200:
            V = random_entangled_qsym(rng)
            g = gree(V).gree_nats
            rci = reverse_coherent_information(V)
            eof = eof_quadrature_symmetric(V).eof_nats
            assert rci <= g + 1e-5
            assert g <= eof + 1e-5
            checked += 1


class TestFockLossyTmsv:
    def test_lossless_is_pure_with_correct_entropy(self):
        fock = fock_lossy_tmsv(0.5, 1.0, 30)
        w = np.linalg.eigvalsh(fock.amplitudes)
        assert w.max() == pytest.approx(1.0, abs=1e-6)
        d = fock.n_max + 1
        rho = fock.amplitudes.reshape(d, d, d, d)
        rho_a = np.einsum("abcb->ac", rho)
        wa = np.linalg.eigvalsh(rho_a)
        wa = wa[wa > 1e-14]
        assert -np.sum(wa * np.log(wa)) == pytest.approx(tmss_entropy(0.5), abs=1e-6)

    def test_full_loss_gives_product_with_vacuum(self):
        fock = fock_lossy_tmsv(0.5, 0.0, 12)
        d = fock.n_max + 1
        rho = fock.amplitudes.reshape(d, d, d, d)
        rho_b = np.einsum("abad->bd", rho)
        assert rho_b[0, 0] == pytest.approx(1.0, abs=1e-8)
        assert np.abs(rho_b[1:, 1:]).max() < 1e-12

    def test_entropy_matches_gaussian_route(self):
        fock = fock_lossy_tmsv(0.6, 0.5, 30)
        w = np.linalg.eigvalsh(fock.amplitudes)
        w = w[w > 1e-14]
        s_fock = float(-np.sum(w * np.log(w)))
        s_gauss = vn_entropy(loss_channel(tmss(0.6), 0.5))
        assert s_fock == pytest.approx(s_gauss, abs=1e-4)

    def test_trace_deficit_reported(self):
        fock = fock_lossy_tmsv(1.2, 0.9, 12)
        assert fock.trace_deficit > 0
        assert fock.truncation_warning == (fock.trace_deficit > 1e-6)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            fock_lossy_tmsv(0.5, 1.5, 10)
        with pytest.raises(ValueError):
            fock_lossy_tmsv(0.5, 0.5, 70)


class TestFockQuadratureSymmetric:
    def test_reproduces_lossy_tmsv(self):
        r, eta = 0.5, 0.6
        ch, sh = np.cosh(2 * r), np.sinh(2 * r)
        a = fock_quadrature_symmetric(ch, eta * ch + 1 - eta, np.sqrt(eta) * sh, 24)
        b = fock_lossy_tmsv(r, eta, 24)
        assert np.abs(a.amplitudes - b.amplitudes).max() < 1e-10

    def test_thermal_product(self):
        got = fock_quadrature_symmetric(2.0, 3.0, 0.0, 20)
        want = fock_thermal_product(2.0, 3.0, 20)
        assert np.abs(got.amplitudes - want.amplitudes).max() < 1e-10

    def test_out_of_family_rejected(self):
        from cvdistill import DecompositionError

        with pytest.raises(DecompositionError):
            # correlations too strong for the diagonal variances
            fock_quadrature_symmetric(1.2, 1.0, 2.0, 10)


class TestFockRelativeEntropy:
    def test_identity(self):
        rho = fock_lossy_tmsv(0.4, 0.7, 16)
        assert fock_relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-10)

    def test_thermal_pair_series(self):
        rho1 = fock_thermal_product(1.0, 1.0, 40)
        rho2 = fock_thermal_product(3.0, 3.0, 40)
        assert fock_relative_entropy(rho1, rho2) == pytest.approx(2 * np.log(2), abs=1e-4)

    def test_truncation_error_decreases(self):
        from cvdistill import add_symmetric_noise

        # second argument must be strictly physical: a pure-loss state keeps
        # one symplectic eigenvalue pinned at 1, so excess noise is required
        V1 = loss_channel(tmss(0.8), 0.6)
        V2 = add_symmetric_noise(loss_channel(tmss(0.7), 0.8), 0.15)
        exact = gaussian_relative_entropy(V1, V2)
        assert np.isfinite(exact)
        p = standard_form(V2)

        def fock_value(n_max):
            rho1 = fock_lossy_tmsv(0.8, 0.6, n_max)
            rho2 = fock_quadrature_symmetric(p.m, p.n, (abs(p.c1) + abs(p.c2)) / 2, n_max)
            return fock_relative_entropy(rho1, rho2)

        errs = [abs(fock_value(n) - exact) for n in (8, 14, 20)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-3

    def test_mismatched_truncation_rejected(self):
        with pytest.raises(ValueError):
            fock_relative_entropy(fock_lossy_tmsv(0.3, 0.5, 10), fock_lossy_tmsv(0.3, 0.5, 12))

    def test_non_psd_rejected(self):
        rho = fock_thermal_product(2.0, 2.0, 6)
        bad = FockStateMatrix(rho.amplitudes - 1e-6 * np.eye((6 + 1) ** 2), 6, 0.0, False)
        with pytest.raises(DegenerateStateError):
            fock_relative_entropy(rho, bad)
