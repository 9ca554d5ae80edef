import numpy as np
import pytest

from cvdistill import (
    DecompositionError,
    add_symmetric_noise,
    channel_purification,
    coherent_information,
    eof_quadrature_symmetric,
    gree,
    loss_channel,
    reverse_coherent_information,
    squashed_upper_bound,
    standard_form,
    standard_form_matrix,
    symmetrize,
    tmss,
    tmss_entropy,
)
from cvdistill.symplectic import StandardFormParams, symplectic_spectrum


class TestSymmetrize:
    def test_symmetric_input_unchanged(self):
        V = loss_channel(tmss(0.7), 0.5)
        assert np.abs(symmetrize(V) - V).max() < 1e-12

    def test_arithmetic_mean(self):
        V = standard_form_matrix(StandardFormParams(3.0, 2.0, 1.2, -1.0))
        p = standard_form(symmetrize(V))
        assert p.c1 == pytest.approx(1.1, abs=1e-12)
        assert p.c2 == pytest.approx(-1.1, abs=1e-12)

    def test_output_is_quadrature_symmetric(self, rng):
        from cvdistill import random_physical_state

        for seed in range(30):
            W = symmetrize(random_physical_state(seed))
            p = standard_form(W)
            assert abs(p.c1 + p.c2) < 1e-12
            assert np.abs(W - standard_form_matrix(p)).max() < 1e-9


class TestChannelPurification:
    @pytest.mark.parametrize(
        "V",
        [
            tmss(0.6),
            loss_channel(tmss(0.9), 0.35),
            add_symmetric_noise(loss_channel(tmss(0.6), 0.7), 0.12),
            add_symmetric_noise(tmss(0.5), 0.08),
        ],
    )
    def test_globally_pure_and_marginal_consistent(self, V):
        ext = channel_purification(V)
        nus = symplectic_spectrum(ext.covariance)
        assert np.abs(nus - 1.0).max() < 1e-8
        assert np.abs(ext.covariance[:4, :4] - symmetrize(V)).max() < 1e-10

    def test_out_of_family_rejected(self):
        # mode B less noisy than the loss fit allows
        V = standard_form_matrix(StandardFormParams(3.0, 1.01, 2.0, -2.0))
        with pytest.raises(DecompositionError):
            channel_purification(V)


class TestSquashedUpperBound:
    @pytest.mark.parametrize("r", [0.3, 0.6, 1.0])
    def test_pure_state_collapse(self, r):
        assert squashed_upper_bound(tmss(r)) == pytest.approx(tmss_entropy(r), abs=1e-6)

    def test_separable_product(self):
        assert squashed_upper_bound(np.diag([2.0, 2.0, 1.5, 1.5])) <= 1e-8

    def test_lossy_state_sandwich(self):
        V = loss_channel(tmss(1.0), 0.1)
        val = squashed_upper_bound(V)
        assert val >= gree(V).gree_nats - 1e-5
        assert val <= eof_quadrature_symmetric(V).eof_nats + 1e-5

    def test_above_hashing_bounds(self):
        for r in (0.4, 0.8, 1.2):
            for eta in (0.15, 0.5, 0.85):
                V = loss_channel(tmss(r), eta)
                val = squashed_upper_bound(V)
                assert val >= max(coherent_information(V), reverse_coherent_information(V)) - 1e-6

    def test_monotone_in_transmissivity(self):
        vals = [squashed_upper_bound(loss_channel(tmss(0.8), e)) for e in np.linspace(0.05, 0.95, 20)]
        assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))

    def test_noisy_states_supported(self):
        V = add_symmetric_noise(loss_channel(tmss(0.6), 0.5), 0.1)
        val = squashed_upper_bound(V)
        assert val >= max(coherent_information(V), reverse_coherent_information(V)) - 1e-6
