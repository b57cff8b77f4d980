"""Scheme SNR formulas: frozen hand values, identities, per-draw ordering."""

import numpy as np
import pytest

from relaysim.channel import (
    ChannelRealization,
    Partition,
    draw_batch,
    draw_realization,
    derive_trial_rng,
    integer_partitions,
)
from relaysim.combining import (
    Scheme,
    decode_mask,
    mrc_relay_snr,
    per_relay_power,
    relay_snrs,
    select_decoding_set,
    selection_stc_snr,
    selection_tb_snr,
    signal_level_oracle,
    snr_report,
    snr_threshold,
    stc_destination_snr,
    tb_destination_snr,
    tb_transmit_vector,
)


def _real(h, g) -> ChannelRealization:
    return ChannelRealization(h=np.asarray(h, complex), g=np.asarray(g, complex))


class TestThresholdAndScheme:
    def test_threshold_values(self):
        # Two-slot protocol: rate 1 needs 2**2 - 1 = 3; rate 0.5 needs 1.
        assert snr_threshold(1.0) == 3.0
        assert snr_threshold(0.5) == 1.0
        assert snr_threshold(0.0) == 0.0
        with pytest.raises(ValueError):
            snr_threshold(-0.1)

    def test_scheme_flags(self):
        assert Scheme("sel-tb").is_selection and Scheme("sel-tb").is_beamforming
        assert not Scheme("genie-stc").is_selection
        assert not Scheme("genie-stc").is_beamforming
        assert {s.value for s in Scheme} == {
            "genie-tb", "genie-stc", "sel-tb", "sel-stc",
        }


class TestRelaySnr:
    def test_hand_values(self):
        assert mrc_relay_snr(np.array([1.0, 1.0j]), eta=2.0) == 4.0
        assert mrc_relay_snr(np.array([0.0j]), eta=5.0) == 0.0

    def test_relay_snrs_groups_antennas(self):
        real = _real([1, 1j, 2, 0], [1, 1, 1, 1])
        snrs = relay_snrs(real, Partition((2, 2)), eta=1.0)
        assert np.allclose(snrs, [2.0, 4.0])
        snrs = relay_snrs(real, Partition((1, 3)), eta=2.0)
        assert np.allclose(snrs, [2.0, 10.0])

    def test_mean_snr_is_eta_times_antennas(self):
        h, _ = draw_batch(31, np.arange(200_000), 2)
        vals = mrc_relay_snr(h, eta=1.0)
        # E = m = 2, Var = m: sigma of the mean ~ 0.003.
        assert abs(vals.mean() - 2.0) < 0.02

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            mrc_relay_snr(np.array([1.0 + 0j]), eta=-1.0)


class TestDestinationSnr:
    def test_tb_hand_values(self):
        # Equal-gain antennas across two single-antenna relays: coherent
        # amplitudes add, (sqrt(1/2) + sqrt(1/2))**2 = 2.
        assert tb_destination_snr(_real([0, 0], [1, 1]), Partition((1, 1)), 1.0) == pytest.approx(2.0)
        # Same coefficients colocated: eta * total power = 2.
        assert tb_destination_snr(_real([0, 0], [1, 1]), Partition((2,)), 1.0) == 2.0
        # A dead relay contributes nothing: (sqrt(1/2*4) + 0)**2 = 2,
        # half of the colocated value 4.
        assert tb_destination_snr(_real([0, 0], [2, 0]), Partition((1, 1)), 1.0) == pytest.approx(2.0)
        assert tb_destination_snr(_real([0, 0], [2, 0]), Partition((2,)), 1.0) == 4.0

    def test_stc_hand_value_and_eta_zero(self):
        assert stc_destination_snr(np.array([1.0, 1.0]), eta=1.0) == 1.0
        assert stc_destination_snr(np.array([1.0, 1.0]), eta=0.0) == 0.0

    def test_stc_is_colocated_tb_over_n_exactly(self):
        _, g = draw_batch(7, np.arange(10_000), 4, include_backward=False)
        colocated = tb_destination_snr(g, Partition((4,)), eta=2.5)
        baseline = stc_destination_snr(g, eta=2.5)
        # N = 4 is a power of two, so the /N and *N round exactly.
        assert np.array_equal(baseline * 4.0, colocated)

    def test_stc_invariant_under_antenna_permutation(self):
        _, g = draw_batch(8, np.arange(100), 4, include_backward=False)
        shuffled = g[:, [2, 0, 3, 1]]
        assert np.allclose(
            stc_destination_snr(shuffled, 1.0),
            stc_destination_snr(g, 1.0),
            rtol=1e-12,
        )

    def test_equal_magnitude_coefficients_reach_colocated(self):
        # With equal antenna magnitudes the Cauchy-Schwarz bound is tight:
        # any grouping beams as well as a single N-antenna relay.
        phases = np.exp(1j * np.linspace(0.1, 2.9, 4))
        real = _real([0, 0, 0, 0], 1.3 * phases)
        top = tb_destination_snr(real, Partition((4,)), 2.0)
        for p in integer_partitions(4):
            assert tb_destination_snr(real, p, 2.0) == pytest.approx(top, rel=1e-12)

    def test_per_draw_ordering_all_partitions(self):
        # For every draw: baseline STC <= any grouping's TB <= colocated TB,
        # and the all-single-antenna grouping is the worst TB grouping.
        for n in (2, 3, 4):
            _, g = draw_batch(400 + n, np.arange(100_000), n, include_backward=False)
            colocated = tb_destination_snr(g, Partition((n,)), 1.0)
            spread = tb_destination_snr(g, Partition((1,) * n), 1.0)
            baseline = stc_destination_snr(g, 1.0)
            tol = 1.0 + 1e-12
            assert np.all(baseline <= spread * tol)
            for p in integer_partitions(n):
                tb = tb_destination_snr(g, p, 1.0)
                assert np.all(tb <= colocated * tol)
                assert np.all(spread <= tb * tol)

    def test_antenna_count_mismatch_rejected(self):
        with pytest.raises(ValueError):
            tb_destination_snr(np.ones(3, complex), Partition((2, 2)), 1.0)


class TestSelection:
    def test_decoding_set_hand_values(self):
        assert select_decoding_set(np.array([0.5, 3.0]), rate=0.5) == (1,)
        # SNR exactly at the threshold decodes.
        assert select_decoding_set(np.array([3.0, 2.999]), rate=1.0) == (0,)
        assert select_decoding_set(np.array([0.1, 0.2]), rate=1.0) == ()

    def test_decode_mask_batch(self):
        snrs = np.array([[1.0, 3.0], [4.0, 0.5]])
        assert np.array_equal(
            decode_mask(snrs, rate=1.0), [[False, True], [True, False]]
        )

    def test_full_set_equals_genie(self):
        _, g = draw_batch(11, np.arange(5_000), 4, include_backward=False)
        p = Partition((2, 2))
        full = np.ones((g.shape[0], 2), dtype=bool)
        assert np.allclose(
            selection_tb_snr(g, p, full, 3.0),
            tb_destination_snr(g, p, 3.0),
            rtol=1e-12,
        )
        assert np.allclose(
            selection_stc_snr(g, p, full, 3.0),
            stc_destination_snr(g, 3.0),
            rtol=1e-12,
        )

    def test_empty_set_is_zero(self):
        g = np.ones(4, complex)
        p = Partition((2, 2))
        assert selection_tb_snr(g, p, (), 5.0) == 0.0
        assert selection_stc_snr(g, p, (), 5.0) == 0.0

    def test_single_active_relay_hand_values(self):
        # Power re-spreads over the active relay's antennas: with
        # |g|^2 = [2, 2] per relay, selecting one gives (sqrt(2*2))**2/2 = 2.
        g = np.array([1.0, 1.0, 1.0, 1.0], complex)
        p = Partition((2, 2))
        assert selection_tb_snr(g, p, (0,), 1.0) == pytest.approx(2.0)
        assert selection_stc_snr(g, p, (0,), 1.0) == pytest.approx(1.0)
        # Index and mask forms agree.
        assert selection_tb_snr(g, p, np.array([True, False]), 1.0) == pytest.approx(2.0)

    def test_rate_zero_reduces_selection_to_genie(self):
        h, g = draw_batch(13, np.arange(10_000), 4)
        p = Partition((2, 1, 1))
        mask = decode_mask(relay_snrs(h, p, 1.0), rate=0.0)
        assert mask.all()
        assert np.allclose(
            selection_tb_snr(g, p, mask, 2.0),
            tb_destination_snr(g, p, 2.0),
            rtol=1e-12,
        )

    def test_invalid_selection_rejected(self):
        g = np.ones(4, complex)
        p = Partition((2, 2))
        with pytest.raises(ValueError):
            selection_tb_snr(g, p, (2,), 1.0)
        with pytest.raises(ValueError):
            selection_tb_snr(g, p, np.array([True, False, True]), 1.0)


class TestTransmitVector:
    def test_power_share_exact_over_draws(self):
        _, g = draw_batch(17, np.arange(2_000), 4, include_backward=False)
        p = Partition((3, 1))
        for eta in (0.5, 1.0, 7.0):
            for row in range(0, 2_000, 97):
                for k, s in enumerate(p.antenna_slices()):
                    d = tb_transmit_vector(g[row, s], p.n, eta)
                    share = eta * p.m[k] / p.n
                    assert np.vdot(d, d).real == pytest.approx(share, rel=1e-12)

    def test_alignment_hand_value(self):
        # g = [3, 4i]: the aligned unit vector is [3, -4i]/5, and the
        # coupling g . d equals ||g|| times the power scale.
        d = tb_transmit_vector(np.array([3.0, 4.0j]), n_total=2, eta=2.0)
        scale = np.sqrt(2.0 * 2 / 2)
        assert np.allclose(d, scale * np.array([3.0, -4.0j]) / 5.0)
        coupling = np.asarray(np.array([3.0, 4.0j]) @ d)
        assert coupling.imag == pytest.approx(0.0, abs=1e-12)
        assert coupling.real == pytest.approx(scale * 5.0, rel=1e-12)

    def test_coupling_matches_tb_snr(self):
        # Sum of per-relay couplings squared equals the TB destination SNR.
        real = draw_realization(derive_trial_rng(3, 5), 4)
        p = Partition((2, 2))
        eta = 3.0
        coupling = sum(
            real.g[s] @ tb_transmit_vector(real.g[s], p.n, eta)
            for s in p.antenna_slices()
        )
        assert abs(coupling) ** 2 == pytest.approx(
            tb_destination_snr(real, p, eta), rel=1e-12
        )

    def test_zero_channel_stays_silent(self):
        d = tb_transmit_vector(np.zeros(3, complex), 4, 2.0)
        assert np.array_equal(d, np.zeros(3, complex))

    def test_symbol_scales_linearly(self):
        g = np.array([1.0, 1.0j])
        d1 = tb_transmit_vector(g, 2, 1.0, symbol=1.0)
        dj = tb_transmit_vector(g, 2, 1.0, symbol=1.0j)
        assert np.allclose(dj, 1.0j * d1)

    def test_invalid_inputs_rejected(self):
        with pytest.raises(ValueError):
            tb_transmit_vector(np.ones(4, complex), 3, 1.0)
        with pytest.raises(ValueError):
            tb_transmit_vector(np.ones(2, complex), 2, -1.0)


class TestSnrReport:
    def test_fields_match_individual_ops(self):
        real = draw_realization(derive_trial_rng(21, 4), 4)
        p = Partition((2, 1, 1))
        rep = snr_report(real, p, eta=4.0, rate=1.0)
        assert np.allclose(rep.relay_snr, relay_snrs(real, p, 4.0))
        assert rep.decoding_set == select_decoding_set(rep.relay_snr, 1.0)
        assert rep.genie_tb == tb_destination_snr(real, p, 4.0)
        assert rep.genie_stc == stc_destination_snr(real, 4.0)
        assert rep.sel_tb == selection_tb_snr(real, p, rep.decoding_set, 4.0)
        assert rep.sel_stc == selection_stc_snr(real, p, rep.decoding_set, 4.0)
        assert rep.scheme_snr(Scheme.GENIE_TB) == rep.genie_tb

    def test_per_draw_dominances(self):
        # Note selection may exceed the genie scheme: the genie spreads
        # power over all N antennas while selection re-spreads it over the
        # decoders only.  What always holds per draw: beamforming dominates
        # the STC baseline on the same set, and nothing beats a single
        # relay owning all antennas (colocated upper envelope).
        colocated = Partition((4,))
        for t in range(200):
            real = draw_realization(derive_trial_rng(55, t), 4)
            rep = snr_report(real, Partition((2, 2)), eta=1.5, rate=1.0)
            top = tb_destination_snr(real, colocated, 1.5)
            tol = 1 + 1e-12
            assert rep.sel_stc <= rep.sel_tb * tol
            assert rep.genie_stc <= rep.genie_tb * tol
            assert rep.sel_tb <= top * tol
            assert rep.genie_tb <= top * tol


class TestSignalLevelOracle:
    def test_matches_formulas_within_mc_error(self):
        real = draw_realization(derive_trial_rng(7, 0), 4)
        p = Partition((2, 2))
        eta = 2.5
        est = signal_level_oracle(
            real, p, eta, n_symbols=400_000, rng=np.random.default_rng(1)
        )
        formulas = relay_snrs(real, p, eta)
        # 4e5 noise samples: relative error ~0.16%, 1% is a wide margin.
        assert np.allclose(est.relay_snr, formulas, rtol=0.01)
        assert est.destination_snr == pytest.approx(
            tb_destination_snr(real, p, eta), rel=0.01
        )

    def test_zero_power_gives_zero(self):
        real = draw_realization(derive_trial_rng(7, 1), 2)
        est = signal_level_oracle(
            real, Partition((1, 1)), 0.0, n_symbols=1_000,
            rng=np.random.default_rng(2),
        )
        assert np.array_equal(est.relay_snr, [0.0, 0.0])
        assert est.destination_snr == 0.0

    def test_dead_relay_reports_zero(self):
        real = _real([1, 1, 0, 0], [1, 1, 1, 1])
        est = signal_level_oracle(
            real, Partition((2, 2)), 1.0, n_symbols=1_000,
            rng=np.random.default_rng(3),
        )
        assert est.relay_snr[1] == 0.0
        assert est.relay_snr[0] > 0.0


class TestPerRelayPower:
    def test_complex_and_real_inputs_agree(self):
        _, g = draw_batch(5, np.arange(50), 4, include_backward=False)
        p = Partition((1, 3))
        direct = per_relay_power(g, p)
        squared = per_relay_power(g.real**2 + g.imag**2, p)
        assert np.array_equal(direct, squared)
        assert direct.shape == (50, 2)

    def test_single_relay_matches_total(self):
        _, g = draw_batch(5, np.arange(50), 4, include_backward=False)
        power = g.real**2 + g.imag**2
        assert np.array_equal(
            per_relay_power(g, Partition((4,)))[:, 0], power.sum(axis=1)
        )
