import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agslm.ofdm import (
    PHASES,
    QAM16,
    PhaseVector,
    SignalSequence,
    SymbolSequence,
    map_qam16,
    oversample,
    papr,
    papr_db,
    phase_codes,
    random_bits,
    random_phase_vector,
    random_symbols,
    trial_streams,
)

from conftest import naive_idft, oversampled


class TestQam16:
    def test_alphabet_has_unit_mean_power(self):
        assert np.mean(np.abs(QAM16) ** 2) == pytest.approx(1.0, abs=1e-15)

    def test_levels(self):
        levels = sorted({round(v * np.sqrt(10)) for v in QAM16.real})
        assert levels == [-3, -1, 1, 3]

    def test_known_words(self):
        s = map_qam16([0, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 1, 1, 0]).symbols
        np.testing.assert_allclose(s * np.sqrt(10), [1 + 1j, 3 - 3j, -1 + 3j, -3 - 1j])

    def test_gray_neighbours_differ_in_one_bit(self):
        # adjacent amplitude levels on one axis differ in exactly one bit
        for a, b in [(0b00, 0b01), (0b00, 0b10), (0b10, 0b11)]:
            assert bin(a ^ b).count("1") == 1
            ia, ib = QAM16[a << 2].real, QAM16[b << 2].real
            assert abs(ia - ib) * np.sqrt(10) == pytest.approx(2.0)

    def test_bad_length(self):
        with pytest.raises(ValueError):
            map_qam16([0, 1, 1])

    def test_non_binary(self):
        with pytest.raises(ValueError):
            map_qam16([0, 1, 2, 0])


class TestSequences:
    def test_symbol_block_must_be_power_of_two(self):
        with pytest.raises(ValueError):
            SymbolSequence(np.ones(6))

    def test_symbols_are_read_only(self):
        s = SymbolSequence(np.ones(4))
        with pytest.raises(ValueError):
            s.symbols[0] = 2

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            SymbolSequence(np.array([1, np.nan, 0, 0]))

    def test_energy_matches_time_domain_mean_power(self, rng):
        X = SymbolSequence(rng.normal(size=32) + 1j * rng.normal(size=32))
        x = SignalSequence(naive_idft(X.symbols))
        assert x.mean_power == pytest.approx(X.energy, rel=1e-12)

    def test_phase_vector_unit_magnitude(self):
        with pytest.raises(ValueError):
            PhaseVector(np.array([1, 2j]), u=2)

    def test_first_phase_vector_is_all_ones(self):
        with pytest.raises(ValueError):
            PhaseVector(np.array([1, 1j]), u=1)
        np.testing.assert_array_equal(random_phase_vector(1, 8, 0).entries, np.ones(8))


class TestOversample:
    def test_zero_insertion(self, rng):
        X = map_qam16(rng.integers(0, 2, 64))
        Y = oversample(X, 4)
        np.testing.assert_array_equal(Y.symbols, oversampled(X.symbols, 4))
        assert len(Y) == 64 and Y.n_data == 16

    def test_interpolates_nyquist_samples(self, rng):
        X = map_qam16(rng.integers(0, 2, 64))
        x = naive_idft(X.symbols)
        y = naive_idft(oversample(X, 4).symbols)
        # every 4th oversampled sample agrees with the Nyquist-rate signal
        np.testing.assert_allclose(y[::4], x, atol=1e-10)

    def test_rotation_touches_data_bins_only(self, rng):
        X = oversample(map_qam16(rng.integers(0, 2, 32)), 2)
        pv = random_phase_vector(3, 8, 5)
        R = X.rotate(pv)
        assert np.count_nonzero(R.symbols) == 8
        np.testing.assert_allclose(np.abs(R.symbols), np.abs(X.symbols))

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            oversample(SymbolSequence(np.ones(4)), 3)


class TestPapr:
    def test_constant_envelope_is_zero_db(self):
        x = SignalSequence(np.exp(1j * np.arange(16)))
        assert papr_db(x) == pytest.approx(0.0, abs=1e-12)

    def test_single_tone_block(self):
        x = SignalSequence(np.r_[2.0, np.zeros(7)])
        assert papr(x) == pytest.approx(8.0)

    def test_explicit_reference(self):
        x = SignalSequence(np.r_[2.0, np.zeros(7)])
        assert papr(x, reference_power=1.0) == pytest.approx(4.0)

    def test_zero_block(self):
        with pytest.raises(ValueError):
            papr(SignalSequence(np.zeros(4)))

    @given(st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=1, max_size=64))
    def test_papr_at_least_one(self, values):
        x = SignalSequence(np.array(values))
        if x.mean_power > 1e-12:
            assert papr(x) >= 1.0 - 1e-12


class TestRandomStreams:
    def test_reproducible(self):
        a = random_symbols(64, trial_streams(3, 7)[0]).symbols
        b = random_symbols(64, trial_streams(3, 7)[0]).symbols
        np.testing.assert_array_equal(a, b)

    def test_trials_independent(self):
        a = random_symbols(64, trial_streams(3, 7)[0]).symbols
        b = random_symbols(64, trial_streams(3, 8)[0]).symbols
        assert not np.array_equal(a, b)

    def test_symbols_roughly_uniform(self):
        bits = random_bits(4 * 40000, 11)
        words = bits.reshape(-1, 4) @ [8, 4, 2, 1]
        counts = np.bincount(words, minlength=16)
        assert counts.min() > 2300 and counts.max() < 2700

    @settings(max_examples=25)
    @given(st.integers(2, 12), st.integers(2, 12), st.integers(0, 2**32))
    def test_phase_codes_prefix_consistent(self, u_small, extra, seed):
        big = phase_codes(u_small + extra, 37, seed)
        small = phase_codes(u_small, 37, seed)
        np.testing.assert_array_equal(big[: u_small - 1], small)

    def test_phase_vector_matches_codes(self):
        codes = phase_codes(6, 50, 9)
        for u in range(2, 7):
            np.testing.assert_array_equal(random_phase_vector(u, 50, 9).entries, PHASES[codes[u - 2]])
