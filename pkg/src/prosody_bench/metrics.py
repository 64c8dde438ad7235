"""Evaluation quantities: token error rates, pairwise MTER, phone
normalized mutual information, cluster-frequency histograms and a paired
t-test with a self-contained incomplete-beta p-value."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (
    DegeneratePhoneSet,
    EmptyAfterDedup,
    EmptyReference,
    EmptySegment,
    FrameRateMismatch,
    LengthMismatch,
    TokenOutOfRange,
    TooFewSequences,
    ZeroVariance,
)
from .quantizer import TokenSequence, deduplicate
from .vocoder import Segment, segment_to_frames

# how the emitted reports normalize edit distances; recorded in run metadata
TER_NORMALIZATION = "reference_length"
MTER_PAIR_NORMALIZATION = "max_length"


@dataclass
class MetricsReport:
    """Named metric values for one experimental condition."""

    condition_id: str
    values: dict
    n_items: int
    kind: str = ""
    k: int = 0
    source_tag: str = ""
    scale: float = float("nan")
    window: int = 0


def levenshtein(a, b) -> int:
    """Edit distance (insertions + deletions + substitutions)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if len(a) == 0:
        return len(b)
    if len(b) == 0:
        return len(a)
    m = len(b)
    ar = np.arange(m + 1)
    prev = ar.copy()
    base = np.empty(m + 1)
    for i in range(1, len(a) + 1):
        base[0] = i
        base[1:] = np.minimum(prev[:-1] + (b != a[i - 1]), prev[1:] + 1)
        # deletion chains resolve as a prefix-min scan: cur[j] =
        # min_{l<=j} base[l] + (j - l)
        prev = np.minimum.accumulate(base - ar) + ar
    return int(prev[m])


def ter(ref: TokenSequence, hyp: TokenSequence) -> float:
    """Edit distance normalized by the reference length."""
    if len(ref) == 0:
        raise EmptyReference("reference token sequence is empty")
    return levenshtein(ref.tokens, hyp.tokens) / len(ref)


def segment_ter(ref: TokenSequence, hyp: TokenSequence, seg: Segment) -> float:
    """TER restricted to the token frames covered by a segment."""
    if ref.frame_period_ms != hyp.frame_period_ms:
        raise FrameRateMismatch(
            f"{ref.frame_period_ms} ms vs {hyp.frame_period_ms} ms"
        )
    start, end = segment_to_frames(seg, ref.frame_period_ms)
    start = max(start, 0)
    ref_slice = np.asarray(ref.tokens)[start:end]
    hyp_slice = np.asarray(hyp.tokens)[start:end]
    if len(ref_slice) == 0 or len(hyp_slice) == 0:
        raise EmptySegment(f"segment [{seg.start_s}, {seg.end_s}) maps to no frames")
    return levenshtein(ref_slice, hyp_slice) / len(ref_slice)


def mter(seqs, dedup: bool = True) -> float:
    """Mean pairwise TER over all unordered sequence pairs.

    Each pair normalizes by the longer sequence so the quantity is
    symmetric; deduplication (when enabled) is applied first.
    """
    if len(seqs) < 2:
        raise TooFewSequences("MTER needs at least two sequences")
    if dedup:
        seqs = [deduplicate(s) for s in seqs]
    token_lists = [np.asarray(s.tokens) for s in seqs]
    if any(len(t) == 0 for t in token_lists):
        raise EmptyAfterDedup("empty token sequence in MTER input")
    total = 0.0
    n_pairs = 0
    for a, b in combinations(token_lists, 2):
        total += levenshtein(a, b) / max(len(a), len(b))
        n_pairs += 1
    return total / n_pairs


def _index_by_first_appearance(labels):
    """Map labels to dense indices in order of first appearance.

    Using appearance order (rather than sorting) makes PNMI exactly
    invariant under bijective relabeling of either side.
    """
    mapping = {}
    out = np.empty(len(labels), dtype=np.int64)
    for i, lab in enumerate(labels):
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out, len(mapping)


def _entropy_from_counts(counts: np.ndarray, total: float) -> float:
    nz = counts[counts > 0]
    return float(math.log(total) - (nz * np.log(nz)).sum() / total)


def pnmi(token_seqs, phone_labels) -> float:
    """Mutual information between phones and tokens over H(phone).

    ``phone_labels`` holds, per utterance, a frame-aligned label list of
    the same length as the utterance's token sequence.
    """
    if len(token_seqs) != len(phone_labels):
        raise LengthMismatch("one phone label list per token sequence required")
    all_tokens = []
    all_phones = []
    for seq, phones in zip(token_seqs, phone_labels):
        if len(seq) != len(phones):
            raise LengthMismatch(
                f"{seq.utterance_id}: {len(seq)} tokens vs {len(phones)} phones"
            )
        all_tokens.extend(int(t) for t in seq.tokens)
        all_phones.extend(phones)
    phone_idx, n_phones = _index_by_first_appearance(all_phones)
    token_idx, n_tokens = _index_by_first_appearance(all_tokens)
    if n_phones < 2:
        raise DegeneratePhoneSet("PNMI undefined for a single phone class")
    total = float(len(phone_idx))
    joint = np.zeros((n_phones, n_tokens))
    np.add.at(joint, (phone_idx, token_idx), 1.0)
    h_phone = _entropy_from_counts(joint.sum(axis=1), total)
    h_token = _entropy_from_counts(joint.sum(axis=0), total)
    h_joint = _entropy_from_counts(joint.ravel(), total)
    mi = h_phone + h_token - h_joint
    return float(np.clip(mi / h_phone, 0.0, 1.0))


def cluster_histogram(seqs, k: int) -> np.ndarray:
    """Sorted (descending) normalized token-frequency distribution."""
    counts = np.zeros(k, dtype=np.int64)
    for seq in seqs:
        tokens = np.asarray(seq.tokens)
        if len(tokens) and (tokens.min() < 0 or tokens.max() >= k):
            raise TokenOutOfRange(f"token id outside [0, {k})")
        counts += np.bincount(tokens, minlength=k)
    total = counts.sum()
    if total == 0:
        raise TooFewSequences("no tokens to histogram")
    freq = np.sort(counts / total)[::-1]
    return freq


# --- paired t-test ------------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 200):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-12:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log(1.0 - x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def paired_t_test(x, y) -> tuple[float, float]:
    """Two-sided paired t-test; returns (t statistic, p value)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise LengthMismatch("need two equal-length samples of size >= 2")
    d = x - y
    n = len(d)
    sd = d.std(ddof=1)
    if sd == 0.0:
        raise ZeroVariance("all paired differences are equal")
    t = float(d.mean() / (sd / math.sqrt(n)))
    df = n - 1
    p = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
    return t, float(p)
