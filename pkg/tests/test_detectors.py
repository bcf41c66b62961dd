import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detdeco.detectors import (
    DetectorKind,
    DetectorSpec,
    DiagonalPovm,
    apd_povm,
    build_povm,
    click_probabilities,
    dark_count_convolve,
    tmd_povm,
)
from detdeco.errors import DomainError, TruncationError
from detdeco.fock import IDENTITY_WIGNER
from oracles import apd_monte_carlo, tmd_monte_carlo

ETA_GRID = np.round(np.arange(0.05, 0.96, 0.05), 2)
NU_GRID = np.round(np.arange(0.0, 0.51, 0.05), 2)


def apd(eta, nu=0.0):
    return DetectorSpec(DetectorKind.APD_ON_OFF, eta, nu)


def tmd(eta, nu=0.0):
    return DetectorSpec(DetectorKind.TMD_SINGLE_LOOP, eta, nu)


class TestSpec:
    @pytest.mark.parametrize("eta,nu", [(-0.1, 0.0), (1.1, 0.0), (0.5, -0.01), (0.5, np.inf)])
    def test_rejects_out_of_domain(self, eta, nu):
        with pytest.raises(DomainError):
            DetectorSpec("apd", eta, nu)

    def test_kind_from_string(self):
        assert DetectorSpec("tmd", 0.3).kind is DetectorKind.TMD_SINGLE_LOOP


class TestApd:
    def test_vacuum_never_clicks(self):
        p = apd_povm(apd(0.28), 10)
        assert p.table[0, 0] == 1.0 and p.table[0, 1] == 0.0

    def test_noisy_two_photon_off(self):
        p = apd_povm(apd(0.28, 0.03), 10)
        assert p.table[2, 0] == pytest.approx(math.exp(-0.03) * 0.72**2, rel=1e-14)
        assert p.table[2, 0] == pytest.approx(0.503079, abs=1e-6)

    def test_perfect_detector(self):
        p = apd_povm(apd(1.0), 10)
        expected = np.ones(11)
        expected[0] = 0.0
        np.testing.assert_array_equal(p.column(1), expected)

    def test_kind_mismatch(self):
        with pytest.raises(ValueError):
            apd_povm(tmd(0.3), 10)

    def test_labels(self):
        assert apd_povm(apd(0.3), 3).labels == ("off", "on")


class TestTmd:
    @pytest.mark.parametrize("eta", [0.1, 0.28, 0.9])
    def test_single_photon_clicks_with_efficiency(self, eta):
        assert tmd_povm(tmd(eta), 5).table[1, 1] == pytest.approx(eta, rel=1e-13)

    def test_two_photons_fill_both_bins_half_the_time(self):
        p = tmd_povm(tmd(1.0), 5)
        assert p.table[2, 1] == pytest.approx(0.5)
        assert p.table[2, 2] == pytest.approx(0.5)
        assert p.meta["eta_limit"]

    def test_matches_printed_coefficient(self):
        # 2 e^{-nu/2} (1-eta)^l (-e^{-nu/2} + (1 + eta/(2(1-eta)))^l)
        eta, nu = 0.28, 0.08
        l = np.arange(30)
        printed = 2 * math.exp(-nu / 2) * (1 - eta) ** l * (-math.exp(-nu / 2) + (1 + eta / (2 * (1 - eta))) ** l)
        np.testing.assert_allclose(tmd_povm(tmd(eta, nu), 29).column(1), printed, rtol=1e-12, atol=1e-15)

    def test_three_photon_one_click(self):
        r31 = tmd_povm(tmd(0.28, 0.08), 10).table[3, 1]
        assert r31 == pytest.approx(2 * math.exp(-0.04) * 0.86**3 - 2 * math.exp(-0.08) * 0.72**3, rel=1e-14)
        assert r31 == pytest.approx(0.5331291, abs=1e-7)

    @pytest.mark.parametrize("nu", [1e-13, 1e-9])
    def test_tiny_noise_stays_nonnegative(self, nu):
        assert tmd_povm(tmd(0.5, nu), 20).min_coefficient() >= 0.0

    def test_no_click_column_equals_apd_off(self):
        for eta in (0.1, 0.5, 0.9):
            for nu in (0.0, 0.2):
                np.testing.assert_array_equal(
                    tmd_povm(tmd(eta, nu), 50).column(0), apd_povm(apd(eta, nu), 50).column(0)
                )


@pytest.mark.parametrize("kind", list(DetectorKind))
def test_completeness_and_positivity_grid(kind):
    for eta in ETA_GRID:
        for nu in NU_GRID:
            p = build_povm(DetectorSpec(kind, eta, nu), 200)
            assert p.completeness_error() <= 1e-10
            assert p.min_coefficient() >= -1e-9
            p.check()


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(list(DetectorKind)), st.floats(0, 1), st.floats(0, 5))
def test_completeness_property(kind, eta, nu):
    p = build_povm(DetectorSpec(kind, eta, nu), 80)
    assert p.completeness_error() <= 1e-10
    assert p.min_coefficient() >= -1e-9


class TestMonteCarloChain:
    TRIALS = 10**7

    @pytest.mark.slow
    @pytest.mark.parametrize("l", range(7))
    def test_tmd_coefficients(self, l):
        eta, nu = 0.28, 0.08
        rng = np.random.default_rng(1000 + l)
        freq = tmd_monte_carlo(l, eta, nu, self.TRIALS, rng)
        analytic = tmd_povm(tmd(eta, nu), 6).table[l]
        se = np.sqrt(analytic * (1 - analytic) / self.TRIALS)
        assert np.all(np.abs(freq - analytic) <= 4 * se + 1e-12)

    @pytest.mark.parametrize("l", [0, 1, 3, 6])
    def test_apd_coefficients(self, l):
        eta, nu = 0.28, 0.18
        rng = np.random.default_rng(2000 + l)
        trials = 2 * 10**6
        freq = apd_monte_carlo(l, eta, nu, trials, rng)
        analytic = apd_povm(apd(eta, nu), 6).table[l]
        se = np.sqrt(analytic * (1 - analytic) / trials)
        assert np.all(np.abs(freq - analytic) <= 4 * se + 1e-12)


class TestClickProbabilities:
    def test_apd_off_closed_form(self):
        p = click_probabilities(apd_povm(apd(0.28), 60), 1.0)
        assert p.probs[0] == pytest.approx(math.exp(-0.28), abs=1e-10)
        assert p.probs[0] == pytest.approx(0.755784, abs=1e-6)

    @pytest.mark.parametrize("eta", [0.1, 0.28, 0.7])
    @pytest.mark.parametrize("nu", [0.0, 0.08, 0.3])
    @pytest.mark.parametrize("mu", [0.0, 0.5, 3.0, 10.0])
    def test_apd_closed_form_grid(self, eta, nu, mu):
        p = click_probabilities(apd_povm(apd(eta, nu), 80), mu)
        assert abs(p.probs[0] - math.exp(-nu - eta * mu)) < 1e-10

    @pytest.mark.parametrize("kind", list(DetectorKind))
    def test_vacuum_probe_no_clicks(self, kind):
        p = click_probabilities(build_povm(DetectorSpec(kind, 0.5), 30), 0.0)
        assert p.probs[0] == 1.0
        assert p.deficit == 0.0

    def test_on_probability_monotone_in_mu(self):
        povm = apd_povm(apd(0.28, 0.03), 120)
        on = [click_probabilities(povm, mu).probs[1] for mu in np.linspace(0, 40, 41)]
        assert np.all(np.diff(on) > 0)
        assert on[-1] > 1 - 1e-4

    def test_truncation_error(self):
        with pytest.raises(TruncationError):
            click_probabilities(apd_povm(apd(0.28), 10), 10.0)


class TestDarkCountConvolve:
    @pytest.mark.parametrize("clean", [[1.0, 0.0], [0.3, 0.7], [0.2, 0.5, 0.3]])
    def test_zero_noise_is_identity(self, clean):
        np.testing.assert_allclose(dark_count_convolve(clean, 0.0, len(clean) - 1), clean, atol=1e-15)

    def test_apd_vacuum(self):
        noisy = dark_count_convolve([1.0, 0.0], 0.18, 1)
        assert noisy[0] == pytest.approx(math.exp(-0.18), rel=1e-14)

    def test_tmd_vacuum(self):
        noisy = dark_count_convolve([1.0, 0.0, 0.0], 0.18, 2)
        assert noisy[0] == pytest.approx(0.835270, abs=1e-6)

    def test_reproduces_apd_model(self):
        # for the on/off device, convolving the noiseless POVM rows gives the noisy rows
        eta, nu = 0.28, 0.08
        clean = apd_povm(apd(eta), 20).table
        noisy = apd_povm(apd(eta, nu), 20).table
        for l in range(21):
            np.testing.assert_allclose(dark_count_convolve(clean[l], nu, 1), noisy[l], atol=1e-15)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=3, max_size=3), st.floats(0, 3))
    def test_preserves_normalization(self, raw, nu):
        clean = np.array(raw) + 1e-3
        clean /= clean.sum()
        assert dark_count_convolve(clean, nu, 2).sum() == pytest.approx(1.0, abs=1e-12)


class TestPovmWigner:
    def test_saturating_outcomes(self):
        assert apd_povm(apd(0.28), 60).saturating_outcome() == 1
        assert tmd_povm(tmd(0.28), 60).saturating_outcome() == 2

    def test_on_section_via_complement(self):
        p = apd_povm(apd(0.28, 0.03), 200)
        r = np.linspace(0, 3, 13)
        np.testing.assert_allclose(p.wigner(1, r), IDENTITY_WIGNER - p.wigner(0, r), atol=1e-15)

    def test_identity_povm_is_flat(self):
        ident = DiagonalPovm(np.ones((11, 1)))
        np.testing.assert_allclose(ident.wigner(0, np.linspace(0, 2, 5)), IDENTITY_WIGNER)

    def test_bad_table_shape(self):
        with pytest.raises(DomainError):
            DiagonalPovm(np.ones(5))

    def test_check_flags_incomplete(self):
        with pytest.raises(DomainError):
            DiagonalPovm(np.full((4, 2), 0.4)).check()
