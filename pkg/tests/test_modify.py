import numpy as np
import pytest

from prosody_bench.errors import (
    InvariantViolation,
    NonPositiveIntensity,
    RangeOutOfBounds,
)
from prosody_bench.modify import (
    ScaleFactors,
    modify_utterance_intensity_range,
    modify_utterance_pitch_range,
    modify_word_intensity,
    modify_word_pitch,
    warp_speaker,
)
from prosody_bench.vocoder import ParamTrack

from trackgen import random_track


def make_track(f0, sp=None, n_bins=4):
    f0 = np.asarray(f0, dtype=np.float64)
    T = len(f0)
    sp = np.ones((T, n_bins)) if sp is None else np.asarray(sp, dtype=np.float64)
    return ParamTrack(f0, sp, np.zeros_like(sp), 5.0, 16000)


def test_scale_factors_positive():
    with pytest.raises(InvariantViolation):
        ScaleFactors(alpha=-1.0)


class TestWordPitch:
    def test_hand_example(self):
        track = make_track([100.0, 100.0, 100.0, 100.0])
        out = modify_word_pitch(track, (1, 3), 1.15)
        assert np.allclose(out.f0, [100.0, 115.0, 115.0, 100.0])

    def test_identity_scale(self, rng):
        track = random_track(rng)
        out = modify_word_pitch(track, (0, track.n_frames), 1.0)
        assert np.array_equal(out.f0, track.f0)
        assert np.array_equal(out.sp, track.sp)

    def test_empty_range_rejected(self):
        with pytest.raises(RangeOutOfBounds):
            modify_word_pitch(make_track([100.0] * 4), (2, 2), 1.2)

    def test_locality(self, rng):
        track = random_track(rng, n_frames=20)
        out = modify_word_pitch(track, (5, 10), 2.0)
        assert np.array_equal(out.f0[:5], track.f0[:5])
        assert np.array_equal(out.f0[10:], track.f0[10:])
        assert np.array_equal(out.sp, track.sp)
        assert np.array_equal(out.ap, track.ap)

    def test_input_not_mutated(self, rng):
        track = random_track(rng)
        before = track.f0.copy()
        modify_word_pitch(track, (0, track.n_frames), 2.0)
        assert np.array_equal(track.f0, before)


class TestWordIntensity:
    def test_hand_example(self):
        track = make_track([100.0, 100.0], sp=[[1.0, 2.0], [1.0, 2.0]])
        out = modify_word_intensity(track, (0, 1), 2.2)
        assert np.allclose(out.sp[0], [2.2, 4.4])
        assert np.array_equal(out.sp[1], track.sp[1])

    def test_identity_scale(self, rng):
        track = random_track(rng)
        out = modify_word_intensity(track, (0, track.n_frames), 1.0)
        assert np.array_equal(out.sp, track.sp)

    def test_f0_untouched(self, rng):
        track = random_track(rng)
        out = modify_word_intensity(track, (0, track.n_frames), 3.0)
        assert np.array_equal(out.f0, track.f0)


class TestUtterancePitchRange:
    def test_hand_example(self):
        track = make_track([0.0, 100.0, 200.0, 0.0])
        out = modify_utterance_pitch_range(track, 2.0)
        assert np.allclose(out.f0, [0.0, 50.0, 250.0, 0.0])

    def test_identity_scale(self, rng):
        track = random_track(rng)
        out = modify_utterance_pitch_range(track, 1.0)
        assert np.array_equal(out.f0, track.f0)

    def test_all_unvoiced_noop(self):
        track = make_track([0.0, 0.0, 0.0])
        out = modify_utterance_pitch_range(track, 3.0)
        assert np.array_equal(out.f0, track.f0)

    def test_voiced_mean_preserved(self, rng):
        for alpha in (0.5, 1.3, 2.7):
            track = random_track(rng)
            voiced = track.f0 > 0
            if not voiced.any():
                continue
            out = modify_utterance_pitch_range(track, alpha)
            if np.any(out.f0[voiced] == 1.0):
                continue  # floor engaged, exact identity broken by design
            mu = track.f0[voiced].mean()
            assert abs(out.f0[voiced].mean() - mu) <= 1e-9 * mu

    def test_negative_results_floored(self):
        track = make_track([10.0, 300.0])
        out = modify_utterance_pitch_range(track, 3.0)
        assert out.f0[0] == 1.0  # would be negative otherwise
        assert np.all(out.f0 > 0)


class TestUtteranceIntensityRange:
    def test_hand_example(self):
        # two voiced frames with intensities e^1 and e^3; log-mean is 2,
        # so beta=2 scales the rows by e^-1 and e^+1
        sp = np.stack([np.full(4, np.e), np.full(4, np.e ** 3)])
        track = make_track([100.0, 100.0], sp=sp)
        out = modify_utterance_intensity_range(track, 2.0)
        assert np.allclose(out.sp[0], sp[0] * np.exp(-1.0))
        assert np.allclose(out.sp[1], sp[1] * np.exp(1.0))

    def test_identity_scale_close(self, rng):
        track = random_track(rng)
        out = modify_utterance_intensity_range(track, 1.0)
        assert np.allclose(out.sp, track.sp, rtol=1e-6)

    def test_zero_intensity_rejected(self):
        sp = np.zeros((2, 4))
        sp[1] = 1.0
        track = make_track([100.0, 100.0], sp=sp)
        with pytest.raises(NonPositiveIntensity):
            modify_utterance_intensity_range(track, 2.0)

    def test_log_mean_preserved(self, rng):
        for beta in (0.5, 2.2):
            track = random_track(rng)
            voiced = track.f0 > 0
            if not voiced.any():
                continue
            out = modify_utterance_intensity_range(track, beta)
            log_int = np.log(track.sp.mean(axis=1)[voiced])
            log_int_out = np.log(out.sp.mean(axis=1)[voiced])
            assert abs(log_int_out.mean() - log_int.mean()) <= 1e-6 * max(
                1.0, abs(log_int.mean()))

    def test_unvoiced_rows_unchanged(self, rng):
        track = random_track(rng)
        unvoiced = track.f0 == 0
        out = modify_utterance_intensity_range(track, 2.2)
        assert np.array_equal(out.sp[unvoiced], track.sp[unvoiced])


class TestWarpSpeaker:
    def test_identity_gamma(self, rng):
        track = random_track(rng)
        out = warp_speaker(track, 1.0)
        assert np.array_equal(out.sp, track.sp)

    def test_hand_example_linear_row(self):
        track = make_track([100.0], sp=[[0.0, 2.0, 4.0, 6.0]])
        out = warp_speaker(track, 2.0)
        assert np.allclose(out.sp[0], [0.0, 1.0, 2.0, 3.0])

    def test_clamps_to_last_bin(self):
        track = make_track([100.0], sp=[[1.0, 2.0, 3.0, 9.0]])
        out = warp_speaker(track, 0.5)
        # f=3 -> f'=6, past the last bin, clamps to sp[3]
        assert out.sp[0, 3] == 9.0

    def test_f0_and_ap_unchanged(self, rng):
        track = random_track(rng)
        out = warp_speaker(track, 1.2)
        assert np.array_equal(out.f0, track.f0)
        assert np.array_equal(out.ap, track.ap)


def test_pitch_deviation_grows_with_alpha(rng):
    track = random_track(rng, n_frames=30)
    base = track.f0.copy()
    d1 = np.abs(modify_word_pitch(track, (0, 30), 1.1).f0 - base)
    d2 = np.abs(modify_word_pitch(track, (0, 30), 1.4).f0 - base)
    assert np.all(d2 >= d1)
