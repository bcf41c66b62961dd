import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detdeco.detectors import DetectorSpec, build_povm
from detdeco.errors import ConditioningWarning, DomainError, TruncationWarning
from detdeco.tomography import (
    ClickRecord,
    ProbeSet,
    default_probes,
    em_fit,
    exact_record,
    log_likelihood,
    ml_reconstruct,
    simulate_clicks,
    uncertainty_envelope,
)

APD = DetectorSpec("apd", 0.28, 0.03)
TMD = DetectorSpec("tmd", 0.28, 0.03)


def exact_click_record(spec, probes, pulses=10**12):
    """Record whose frequencies equal the model probabilities to ~1e-12."""
    mus, freqs = exact_record(spec, probes)
    counts = np.rint(freqs * pulses).astype(np.int64)
    counts[:, 0] += pulses - counts.sum(axis=1)
    return ClickRecord(mus, counts, pulses, None, {"kind": spec.kind.value})


class TestProbes:
    def test_default_layout(self):
        p = default_probes()
        assert len(p.intensities) == 20
        assert p.intensities[0] == 0.0 and p.intensities[-1] == 10.0
        assert p.is_spanning()

    @pytest.mark.parametrize("mus", [[1.0, 0.5], [-1.0, 1.0], [], [0.0, np.inf]])
    def test_rejects(self, mus):
        with pytest.raises(DomainError):
            ProbeSet(np.array(mus, dtype=float))

    def test_record_rows_must_sum(self):
        with pytest.raises(DomainError):
            ClickRecord([0.0], [[3, 1]], 5)


class TestSimulate:
    def test_deterministic(self):
        probes = default_probes(pulses_per_point=10**4)
        a = simulate_clicks(TMD, probes, seed=11)
        b = simulate_clicks(TMD, probes, seed=11)
        assert a.counts.tobytes() == b.counts.tobytes()
        assert simulate_clicks(TMD, probes, seed=12).counts.tobytes() != a.counts.tobytes()

    def test_vacuum_probe_noiseless(self):
        rec = simulate_clicks(DetectorSpec("tmd", 0.5, 0.0), ProbeSet([0.0], 1000), seed=0)
        assert rec.counts[0].tolist() == [1000, 0, 0]

    def test_apd_off_fraction(self):
        n = 10**6
        rec = simulate_clicks(DetectorSpec("apd", 0.28, 0.0), ProbeSet([5.0], n), jitter=0.0, seed=3)
        p = math.exp(-1.4)
        assert p == pytest.approx(0.246597, abs=1e-6)
        assert abs(rec.frequencies[0, 0] - p) < 4 * math.sqrt(p * (1 - p) / n)

    def test_jitter_averages_intensity(self):
        # off probability averaged over a uniform spread around mu
        eta, mu, j = 0.28, 6.0, 0.2
        rec = simulate_clicks(DetectorSpec("apd", eta, 0.0), ProbeSet([mu], 10**7), jitter=j, seed=5)
        a, b = mu * (1 - j / 2), mu * (1 + j / 2)
        p = (math.exp(-eta * a) - math.exp(-eta * b)) / (eta * (b - a))
        assert abs(rec.frequencies[0, 0] - p) < 4 * math.sqrt(p * (1 - p) / 10**7)

    def test_jitter_domain(self):
        with pytest.raises(DomainError):
            simulate_clicks(APD, default_probes(), jitter=0.5)

    def test_meta(self):
        rec = simulate_clicks(TMD, default_probes(pulses_per_point=100), seed=1)
        assert rec.meta == {"kind": "tmd", "eta": 0.28, "nu": 0.03, "jitter": 0.05}
        assert rec.seed == 1


class TestEm:
    @pytest.mark.parametrize("spec", [APD, TMD], ids=["apd", "tmd"])
    def test_monotone_likelihood_and_valid_iterates(self, spec):
        rec = simulate_clicks(spec, default_probes(pulses_per_point=10**5), seed=2)

        def check(R):
            assert np.all(R >= 0)
            assert np.max(np.abs(R.sum(axis=1) - 1)) < 1e-12

        _, trace, _ = em_fit(rec.frequencies, rec.intensities, 40, max_iter=400, tol=0.0, callback=check)
        assert len(trace) == 401
        assert np.all(np.diff(trace) >= -1e-9)

    @pytest.mark.parametrize("spec", [APD, TMD], ids=["apd", "tmd"])
    def test_true_povm_is_fixed_point(self, spec):
        probes = default_probes()
        L = 60
        mus, freqs = exact_record(spec, probes, L)
        truth = build_povm(spec, L).table
        table, _, _ = em_fit(freqs, mus, L, max_iter=100, tol=0.0, init=truth)
        assert np.max(np.abs(table - truth)) < 1e-9

    @pytest.mark.parametrize("spec", [APD, TMD], ids=["apd", "tmd"])
    def test_exact_data_recovers_low_rows(self, spec):
        # attainable accuracy of plain EM on 20 noiseless probes
        probes = default_probes()
        mus, freqs = exact_record(spec, probes)
        table, _, _ = em_fit(freqs, mus, 60, max_iter=20000, tol=0.0, smoothing=0.0)
        truth = build_povm(spec, 60).table
        assert np.max(np.abs(table[:11] - truth[:11])) < 2e-3

    def test_exact_data_self_consistency(self):
        mus, freqs = exact_record(APD, default_probes())
        table, _, _ = em_fit(freqs, mus, 60, max_iter=20000, tol=0.0, smoothing=0.0)
        truth = build_povm(APD, 60).table
        assert np.max(np.abs(table[:11] - truth[:11])) < 1e-4

    def test_log_likelihood_peaks_at_data(self):
        mus, freqs = exact_record(APD, default_probes(), 60)
        truth = build_povm(APD, 60).table
        other = build_povm(DetectorSpec("apd", 0.3, 0.03), 60).table
        assert log_likelihood(freqs, mus, truth) > log_likelihood(freqs, mus, other)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.05, 0.95), st.floats(0.0, 0.4), st.integers(0, 2**31))
    def test_property_valid_output(self, eta, nu, seed):
        rec = simulate_clicks(DetectorSpec("tmd", eta, nu), default_probes(pulses_per_point=10**4), seed=seed)
        table, trace, _ = em_fit(rec.frequencies, rec.intensities, 40, max_iter=200, tol=0.0)
        assert np.all(table >= 0)
        assert np.max(np.abs(table.sum(axis=1) - 1)) < 1e-12
        assert np.all(np.diff(trace) >= -1e-9)


class TestReconstruct:
    def test_single_probe_warns(self):
        rec = simulate_clicks(APD, ProbeSet([2.0], 10**4), seed=0)
        with pytest.warns(ConditioningWarning):
            rep = ml_reconstruct(rec, max_iter=50)
        assert rep.warnings

    def test_truncation_warning(self):
        rec = simulate_clicks(APD, ProbeSet(np.linspace(0, 30, 12), 10**4), seed=0)
        with pytest.warns(TruncationWarning):
            ml_reconstruct(rec, L=30, max_iter=50)

    def test_report_fields(self):
        rec = simulate_clicks(TMD, default_probes(pulses_per_point=10**5), seed=4)
        rep = ml_reconstruct(rec, max_iter=500)
        assert rep.povm.kind.value == "tmd"
        assert rep.povm.source == "reconstructed"
        assert rep.iterations == len(rep.loglik_trace) - 1
        assert rep.seed == 4
        rep.povm.check()

    @pytest.mark.slow
    @pytest.mark.parametrize("spec", [APD, TMD], ids=["apd", "tmd"])
    def test_more_pulses_better_fit(self, spec):
        truth = build_povm(spec, 60).table
        errors = {}
        for pulses in (10**4, 10**6):
            errs = []
            for seed in range(5):
                rec = simulate_clicks(spec, default_probes(pulses_per_point=pulses), seed=seed)
                rep = ml_reconstruct(rec)
                errs.append(np.max(np.abs(rep.povm.table[:9] - truth[:9])))
            errors[pulses] = np.median(errs)
        assert errors[10**6] < errors[10**4]


class TestEnvelope:
    def test_single_cutoff_zero_variance(self):
        rec = exact_click_record(APD, default_probes())
        env = uncertainty_envelope(rec, trunc_list=(60,), variance_factor=0.0, resamples=8, max_iter=2000)
        assert env.halfwidth == 0.0
        assert env.failures == 0

    def test_truncation_spread_shrinks(self):
        rec = exact_click_record(TMD, default_probes())
        spreads = []
        for low in (20, 30, 40):
            env = uncertainty_envelope(rec, trunc_list=(low, 60), variance_factor=0.0, resamples=8,
                                       max_iter=3000)
            spreads.append(env.truncation_halfrange)
        assert spreads[0] >= spreads[1] >= spreads[2]

    def test_requires_resamples(self):
        rec = exact_click_record(APD, default_probes())
        with pytest.raises(DomainError):
            uncertainty_envelope(rec, resamples=4)

    @pytest.mark.slow
    def test_envelope_brackets_model(self):
        rec = simulate_clicks(APD, default_probes(), seed=7)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            env = uncertainty_envelope(rec, trunc_list=(50, 60), resamples=16, max_iter=3000)
        truth = build_povm(APD, 200).origin_value(1)
        assert env.halfwidth > 0
        assert abs(env.mean - truth) < 3 * env.halfwidth + 0.01
