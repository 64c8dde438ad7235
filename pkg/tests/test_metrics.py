import functools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prosody_bench.errors import (
    DegeneratePhoneSet,
    EmptyReference,
    EmptySegment,
    FrameRateMismatch,
    LengthMismatch,
    TokenOutOfRange,
    TooFewSequences,
    ZeroVariance,
)
from prosody_bench.metrics import (
    cluster_histogram,
    levenshtein,
    mter,
    paired_t_test,
    pnmi,
    regularized_incomplete_beta,
    segment_ter,
    ter,
)
from prosody_bench.quantizer import TokenSequence
from prosody_bench.vocoder import Segment


def lev_oracle(a, b):
    """Textbook recursive edit distance, memoized."""

    @functools.lru_cache(maxsize=None)
    def rec(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            rec(i - 1, j) + 1,
            rec(i, j - 1) + 1,
            rec(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return rec(len(a), len(b))


def seq(tokens, fpms=20.0, utt="u"):
    return TokenSequence(np.asarray(tokens, dtype=np.int64), fpms, utt)


class TestLevenshtein:
    def test_kitten_sitting(self):
        assert levenshtein(list(b"kitten"), list(b"sitting")) == 3

    def test_empty_sides(self):
        assert levenshtein([], [1, 2, 3]) == 3
        assert levenshtein([1, 2], []) == 2
        assert levenshtein([], []) == 0

    def test_equal_is_zero(self, rng):
        x = rng.integers(0, 10, 30)
        assert levenshtein(x, x) == 0

    def test_against_oracle(self, rng):
        for _ in range(1000):
            a = tuple(rng.integers(0, 5, int(rng.integers(0, 9))))
            b = tuple(rng.integers(0, 5, int(rng.integers(0, 9))))
            assert levenshtein(a, b) == lev_oracle(a, b)

    @given(
        st.lists(st.integers(0, 4), max_size=12),
        st.lists(st.integers(0, 4), max_size=12),
        st.lists(st.integers(0, 4), max_size=12),
    )
    @settings(max_examples=150, deadline=None)
    def test_metric_properties(self, a, b, c):
        assert levenshtein(a, b) == levenshtein(b, a)
        assert levenshtein(a, b) <= levenshtein(a, c) + levenshtein(c, b)
        assert levenshtein(a, b) >= abs(len(a) - len(b))
        assert levenshtein(a, b) <= max(len(a), len(b))


class TestTer:
    def test_hand_value(self):
        assert ter(seq([1, 2, 3, 4]), seq([1, 9, 3, 4])) == 0.25

    def test_identical_zero(self):
        assert ter(seq([5, 5, 2]), seq([5, 5, 2])) == 0.0

    def test_empty_reference(self):
        with pytest.raises(EmptyReference):
            ter(seq([]), seq([1]))

    def test_can_exceed_one(self):
        assert ter(seq([1]), seq([2, 3, 4])) == 3.0


class TestSegmentTer:
    def test_restricts_to_segment(self):
        ref = seq([1, 1, 2, 2, 3, 3], fpms=20.0)
        hyp = seq([1, 1, 9, 9, 3, 3], fpms=20.0)
        # frames 2..4 at 20 ms => [0.04, 0.08) s
        assert segment_ter(ref, hyp, Segment(0.04, 0.08, "w")) == 1.0
        assert segment_ter(ref, hyp, Segment(0.08, 0.12, "w")) == 0.0

    def test_frame_rate_mismatch(self):
        with pytest.raises(FrameRateMismatch):
            segment_ter(seq([1], fpms=20.0), seq([1], fpms=10.0),
                        Segment(0.0, 0.02, "w"))

    def test_empty_segment(self):
        with pytest.raises(EmptySegment):
            segment_ter(seq([1, 2]), seq([1, 2]), Segment(5.0, 5.02, "w"))


class TestMter:
    def test_identical_sequences_zero(self):
        assert mter([seq([1, 2, 3], utt=f"u{i}") for i in range(4)]) == 0.0

    def test_hand_value(self):
        # after dedup: [1,2] vs [1,3] -> 1/2; [1,2] vs [2] -> 1/2;
        # [1,3] vs [2] -> 2/2
        seqs = [seq([1, 1, 2]), seq([1, 3, 3]), seq([2])]
        assert mter(seqs) == pytest.approx((0.5 + 0.5 + 1.0) / 3)

    def test_dedup_flag(self):
        seqs = [seq([1, 1, 2]), seq([1, 2])]
        assert mter(seqs, dedup=True) == 0.0
        assert mter(seqs, dedup=False) == pytest.approx(1.0 / 3.0)

    def test_order_invariant(self, rng):
        seqs = [seq(rng.integers(0, 6, 12), utt=f"u{i}") for i in range(5)]
        perm = [seqs[i] for i in rng.permutation(5)]
        assert mter(seqs) == pytest.approx(mter(perm))

    def test_too_few(self):
        with pytest.raises(TooFewSequences):
            mter([seq([1, 2])])


class TestPnmi:
    def test_bijection_is_one(self):
        tokens = seq([0, 1, 2, 0, 1, 2])
        phones = [["a", "b", "c", "a", "b", "c"]]
        assert pnmi([tokens], phones) == 1.0

    def test_independent_is_zero(self):
        # token constant: MI with any phone labeling is 0
        tokens = seq([7, 7, 7, 7])
        phones = [["a", "a", "b", "b"]]
        assert pnmi([tokens], phones) == 0.0

    def test_hand_value(self):
        # joint counts [[2, 0], [1, 1]]
        tokens = seq([0, 0, 0, 1])
        phones = [["a", "a", "b", "b"]]
        expected = (1.5 * math.log(2) - 0.75 * math.log(3)) / math.log(2)
        assert pnmi([tokens], phones) == pytest.approx(expected, abs=1e-12)

    def test_relabel_invariance(self, rng):
        tokens = [seq(rng.integers(0, 5, 40), utt=f"u{i}") for i in range(3)]
        phones = [list(rng.choice(["a", "b", "c"], 40)) for _ in range(3)]
        base = pnmi(tokens, phones)
        remap = {0: 40, 1: 13, 2: 2, 3: 99, 4: 7}
        tokens2 = [seq([remap[int(t)] for t in s.tokens], utt=s.utterance_id)
                   for s in tokens]
        phones2 = [[{"a": "z", "b": "q", "c": "m"}[p] for p in pl]
                   for pl in phones]
        assert pnmi(tokens2, phones2) == pytest.approx(base, abs=1e-12)

    def test_single_phone_rejected(self):
        with pytest.raises(DegeneratePhoneSet):
            pnmi([seq([0, 1])], [["a", "a"]])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            pnmi([seq([0, 1])], [["a", "b", "c"]])

    def test_bounded(self, rng):
        for _ in range(20):
            n = int(rng.integers(5, 60))
            tokens = [seq(rng.integers(0, 8, n))]
            phones = [list(rng.choice(["a", "b", "c", "d"], n))]
            try:
                v = pnmi(tokens, phones)
            except DegeneratePhoneSet:
                continue
            assert 0.0 <= v <= 1.0


class TestClusterHistogram:
    def test_hand_value(self):
        seqs = [seq([0, 0, 0, 1]), seq([1, 2])]
        freq = cluster_histogram(seqs, 4)
        assert np.allclose(freq, [0.5, 1 / 3, 1 / 6, 0.0])

    def test_sorted_and_sums_to_one(self, rng):
        seqs = [seq(rng.integers(0, 10, 50)) for _ in range(4)]
        freq = cluster_histogram(seqs, 10)
        assert np.all(np.diff(freq) <= 0)
        assert freq.sum() == pytest.approx(1.0)

    def test_out_of_range(self):
        with pytest.raises(TokenOutOfRange):
            cluster_histogram([seq([0, 5])], 5)


class TestPairedTTest:
    @staticmethod
    def p_oracle(t, df):
        """Two-sided p via numeric integration of the t density."""
        from scipy.integrate import quad

        def density(u):
            return (
                math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2))
                / math.sqrt(df * math.pi)
                * (1 + u * u / df) ** (-(df + 1) / 2)
            )

        tail, _ = quad(density, abs(t), np.inf)
        return 2.0 * tail

    def test_hand_case(self):
        x = [2.0, 3.0, 4.0, 5.0]
        y = [1.0, 1.5, 2.5, 4.5]
        t, p = paired_t_test(x, y)
        d = np.array(x) - np.array(y)
        t_expected = d.mean() / (d.std(ddof=1) / math.sqrt(4))
        assert t == pytest.approx(t_expected, rel=1e-12)
        assert p == pytest.approx(self.p_oracle(t_expected, 3), rel=1e-9)

    def test_against_integration_oracle(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 30))
            x = rng.standard_normal(n)
            y = rng.standard_normal(n) + rng.uniform(-1, 1)
            t, p = paired_t_test(x, y)
            assert p == pytest.approx(self.p_oracle(t, n - 1), rel=1e-8)
            assert 0.0 <= p <= 1.0

    def test_symmetric(self, rng):
        x = rng.standard_normal(10)
        y = rng.standard_normal(10)
        t1, p1 = paired_t_test(x, y)
        t2, p2 = paired_t_test(y, x)
        assert t1 == pytest.approx(-t2)
        assert p1 == pytest.approx(p2)

    def test_zero_variance(self):
        with pytest.raises(ZeroVariance):
            paired_t_test([1.0, 2.0, 3.0], [0.0, 1.0, 2.0])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            paired_t_test([1.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(LengthMismatch):
            paired_t_test([1.0], [2.0])


class TestIncompleteBeta:
    def test_against_scipy(self, rng):
        from scipy.special import betainc

        for _ in range(200):
            a = float(rng.uniform(0.1, 20.0))
            b = float(rng.uniform(0.1, 20.0))
            x = float(rng.uniform(0.0, 1.0))
            assert regularized_incomplete_beta(a, b, x) == pytest.approx(
                betainc(a, b, x), abs=1e-10
            )

    def test_edges(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0
