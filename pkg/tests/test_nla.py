import numpy as np
import pytest

from cvdistill import (
    DivergenceError,
    FilterParams,
    StarvationError,
    acceptance_probability,
    add_symmetric_noise,
    duan_sum,
    eof_quadrature_symmetric,
    ideal_nla_state,
    is_physical,
    log_negativity,
    loss_channel,
    mc_distill,
    rescale,
    reverse_coherent_information,
    standard_form,
    success_probability,
    synth_shots,
    tmss,
)


class TestFilterParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            FilterParams(0.9, 1.0)
        with pytest.raises(ValueError):
            FilterParams(1.2, -1.0)
        fp = FilterParams(1.0, 0.0)
        assert fp.gain == 1.0


class TestAcceptanceProbability:
    def test_continuity_at_cutoff(self):
        fp = FilterParams(1.5, 2.0)
        assert acceptance_probability(2.0 + 0j, fp) == pytest.approx(1.0)
        eps = 1e-9
        below = acceptance_probability((2.0 - eps) * np.exp(0.3j), fp)
        assert below == pytest.approx(1.0, abs=1e-6)

    def test_unit_gain_accepts_everything(self):
        fp = FilterParams(1.0, 3.0)
        alphas = np.array([0.0, 1.0 + 1.0j, 5.0j])
        assert np.all(acceptance_probability(alphas, fp) == 1.0)

    def test_direct_evaluation(self):
        fp = FilterParams(2.0, 2.0)
        assert acceptance_probability(0.0 + 0j, fp) == pytest.approx(np.exp(-3.0), rel=1e-12)

    def test_range(self, rng):
        fp = FilterParams(1.7, 2.5)
        alphas = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        p = acceptance_probability(alphas, fp)
        assert np.all((p > 0.0) & (p <= 1.0))


class TestRescale:
    def test_unit_gain_identity(self):
        assert rescale(1.3 - 0.4j, 1.0) == 1.3 - 0.4j

    def test_halving(self):
        assert rescale(2.0 + 2.0j, 2.0) == 1.0 + 1.0j

    def test_flat_filter_variance_shrinks_by_gain_squared(self, rng):
        g = 1.6
        alphas = rng.standard_normal(20000) + 1j * rng.standard_normal(20000)
        keep = rng.random(20000) < 0.37  # acceptance independent of alpha
        out = rescale(alphas[keep], g)
        ratio = np.var(alphas[keep].real) / np.var(out.real)
        assert ratio == pytest.approx(g**2, rel=0.05)


class TestIdealNlaState:
    @pytest.mark.parametrize("r,g", [(0.4, 1.5), (0.6, 1.28)])
    def test_gain_law(self, r, g):
        want = tmss(np.arctanh(g * np.tanh(r)))
        assert np.abs(ideal_nla_state(tmss(r), g) - want).max() < 1e-9

    def test_unit_gain_identity(self):
        V = loss_channel(tmss(0.8), 0.4)
        assert np.array_equal(ideal_nla_state(V, 1.0), V)

    def test_lossy_entanglement_grows(self):
        V = loss_channel(tmss(0.6), 0.1)
        assert log_negativity(ideal_nla_state(V, 1.6)) > log_negativity(V)

    def test_divergence_guard(self):
        with pytest.raises(DivergenceError):
            ideal_nla_state(tmss(0.8), 2.0)  # g tanh r > 1

    def test_physical_and_quadrature_symmetric(self):
        V = add_symmetric_noise(loss_channel(tmss(0.7), 0.3), 0.05)
        out = ideal_nla_state(V, 1.4)
        assert is_physical(out)
        p = standard_form(out)
        assert abs(p.c1 + p.c2) < 1e-9

    def test_measures_monotone_in_gain(self):
        V = loss_channel(tmss(0.7), 0.4)
        gains = [1.0, 1.1, 1.2, 1.3]
        logneg = [log_negativity(ideal_nla_state(V, g)) for g in gains]
        eof = [eof_quadrature_symmetric(ideal_nla_state(V, g)).eof_nats for g in gains]
        rci = [reverse_coherent_information(ideal_nla_state(V, g)) for g in gains]
        duan = [duan_sum(ideal_nla_state(V, g)) for g in gains]
        for series in (logneg, eof, rci):
            assert all(a <= b + 1e-9 for a, b in zip(series, series[1:]))
        assert all(a >= b - 1e-9 for a, b in zip(duan, duan[1:]))


class TestSuccessProbability:
    def test_unit_gain(self):
        assert success_probability(tmss(0.5), FilterParams(1.0, 3.0)) == 1.0

    def test_zero_cutoff(self):
        assert success_probability(tmss(0.5), FilterParams(1.5, 0.0)) == 1.0

    def test_monotone_in_gain(self):
        V = loss_channel(tmss(0.6), 0.1)
        ps = [success_probability(V, FilterParams(g, 3.0)) for g in (1.0, 1.1, 1.3, 1.5, 1.7)]
        assert all(a >= b - 1e-12 for a, b in zip(ps, ps[1:]))

    def test_matches_monte_carlo_acceptance(self):
        V = loss_channel(tmss(0.6), 0.1)
        fp = FilterParams(1.6, 4.0)
        p = success_probability(V, fp)
        records = synth_shots(V, 10**6, 21)
        eff = mc_distill(records, fp, 22)
        sigma = np.sqrt(p * (1 - p) / 10**6)
        assert abs(eff.p_success - p) < 3 * sigma


class TestMcDistill:
    def test_unit_gain_equals_plain_estimate(self):
        from cvdistill import estimate_covariance

        V = loss_channel(tmss(0.5), 0.6)
        records = synth_shots(V, 50_000, 3)
        eff = mc_distill(records, FilterParams(1.0, 3.0), 4)
        plain = estimate_covariance(records)
        assert np.abs(eff.covariance - plain.covariance).max() < 1e-12
        assert eff.p_success == 1.0

    def test_matches_ideal_prediction_at_large_cutoff(self):
        r, g = 0.6, 1.3
        V = tmss(r)
        records = synth_shots(V, 10**6, 11)
        eff = mc_distill(records, FilterParams(g, 4.0), 12)
        ideal = ideal_nla_state(V, g)
        dev = np.abs(eff.covariance - ideal) / np.where(eff.stderr > 0, eff.stderr, 1.0)
        assert dev[eff.stderr > 0].max() < 3.0

    def test_small_cutoff_bias_shrinks(self):
        r, g = 0.5, 1.3
        V = tmss(r)
        ideal = ideal_nla_state(V, g)
        records = synth_shots(V, 400_000, 31)
        biases = []
        for cutoff in (1.5, 2.5, 4.0):
            eff = mc_distill(records, FilterParams(g, cutoff), 32)
            biases.append(np.linalg.norm(eff.covariance - ideal))
        assert biases[0] > biases[1] > biases[2]

    def test_starvation(self):
        V = tmss(0.3)
        records = synth_shots(V, 10**4, 5)
        with pytest.raises(StarvationError):
            mc_distill(records, FilterParams(1.6, 5.0), 6)

    def test_short_stream_rejected(self):
        records = synth_shots(tmss(0.3), 5000, 7)
        with pytest.raises(ValueError):
            mc_distill(records, FilterParams(1.2, 3.0), 8)

    def test_deterministic_and_worker_independent(self):
        V = loss_channel(tmss(0.5), 0.5)
        records = synth_shots(V, 200_000, 13)
        fp = FilterParams(1.3, 3.0)
        a = mc_distill(records, fp, 14, workers=1)
        b = mc_distill(records, fp, 14, workers=4)
        c = mc_distill(records, fp, 14, workers=1)
        assert np.array_equal(a.covariance, b.covariance)
        assert np.array_equal(a.covariance, c.covariance)
        assert a.p_success == b.p_success

    def test_estimator_unbiased_over_repetitions(self):
        # fresh records and fresh acceptance randomness per repetition;
        # the cutoff is large enough that truncation bias is negligible
        r, eta, g, cutoff = 0.5, 0.7, 1.1, 5.0
        V = loss_channel(tmss(r), eta)
        ideal = ideal_nla_state(V, g)
        reps = 100
        seeds = np.random.SeedSequence(2024).spawn(reps)
        covs, errs = [], []
        for s in seeds:
            child = s.spawn(2)
            records = synth_shots(V, 100_000, child[0])
            eff = mc_distill(records, FilterParams(g, cutoff), child[1])
            covs.append(eff.covariance)
            errs.append(eff.stderr)
        mean_cov = np.mean(covs, axis=0)
        mean_err = np.mean(errs, axis=0)
        dev = np.abs(mean_cov - ideal) / np.where(mean_err > 0, mean_err, 1.0)
        assert dev[mean_err > 0].max() < 0.5
