"""K-means tokenization of frame features.

k-means++ seeded Lloyd iterations with deterministic behaviour for a
fixed (samples, k, seed), optional restarts, empty-cluster repair, and
frame-wise token assignment with lowest-index tie breaking.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    NonFiniteValue,
    TokenOutOfRange,
    TooFewSamples,
)
from .features import FeatureMatrix

MODEL_MAGIC = b"PBKM"
MODEL_VERSION = 1

DEFAULT_MAX_ITERS = 100
DEFAULT_TOL = 1e-4


@dataclass
class KMeansModel:
    centroids: np.ndarray  # (k, D)
    feature_tag: str
    train_seed: int
    inertia_history: list = field(default_factory=list)
    degenerate: bool = False

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


@dataclass
class TokenSequence:
    tokens: np.ndarray  # (T,) int64
    frame_period_ms: float
    utterance_id: str

    def __len__(self) -> int:
        return len(self.tokens)


def _pairwise_sq_dist(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Exact squared distances, chunked to bound memory.

    Uses explicit differences (not the expanded-square trick) so that
    symmetric inputs produce bit-equal distances and ties break cleanly.
    """
    n, d = points.shape
    k = centroids.shape[0]
    out = np.empty((n, k))
    chunk = max(1, int(4e6 / max(1, k * d)))
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        diff = points[lo:hi, None, :] - centroids[None, :, :]
        out[lo:hi] = np.einsum("nkd,nkd->nk", diff, diff)
    return out


def _kmeans_pp_init(samples, k, rng):
    n = samples.shape[0]
    centroids = np.empty((k, samples.shape[1]))
    idx = int(rng.integers(n))
    centroids[0] = samples[idx]
    d2 = ((samples - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[j] = samples[idx]
        d2 = np.minimum(d2, ((samples - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _lloyd(samples, k, rng, max_iters, tol):
    centroids = _kmeans_pp_init(samples, k, rng)
    history = []
    for _ in range(max_iters):
        dist = _pairwise_sq_dist(samples, centroids)
        labels = dist.argmin(axis=1)
        history.append(float(dist[np.arange(len(samples)), labels].sum()))
        new_centroids = centroids.copy()
        point_dist = dist[np.arange(len(samples)), labels]
        for j in range(k):
            members = labels == j
            if members.any():
                new_centroids[j] = samples[members].mean(axis=0)
            else:
                # reseed onto the point farthest from its assigned centroid
                far = int(point_dist.argmax())
                new_centroids[j] = samples[far]
                point_dist[far] = -1.0
        shift = np.linalg.norm(new_centroids - centroids)
        scale = np.linalg.norm(centroids) + 1e-12
        centroids = new_centroids
        if shift / scale < tol:
            break
    # final assignment so the recorded inertia matches the final centroids
    dist = _pairwise_sq_dist(samples, centroids)
    labels = dist.argmin(axis=1)
    history.append(float(dist[np.arange(len(samples)), labels].sum()))
    return centroids, history


def kmeans_train(
    samples: np.ndarray,
    k: int,
    seed: int,
    max_iters: int = DEFAULT_MAX_ITERS,
    tol: float = DEFAULT_TOL,
    restarts: int = 1,
    feature_tag: str = "",
) -> KMeansModel:
    """Train a k-means quantizer; deterministic for fixed inputs and seed."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise DimensionMismatch("samples must be an (N, D) matrix")
    if not np.all(np.isfinite(samples)):
        raise NonFiniteValue("samples contain non-finite values")
    if samples.shape[0] < k:
        raise TooFewSamples(f"{samples.shape[0]} samples for k={k}")
    if k > 1 and np.all(samples == samples[0]):
        # all points identical: duplicate the point across centroids
        centroids = np.repeat(samples[:1], k, axis=0)
        return KMeansModel(centroids, feature_tag, seed, [0.0], degenerate=True)

    best = None
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        centroids, history = _lloyd(samples, k, rng, max_iters, tol)
        if best is None or history[-1] < best[1][-1]:
            best = (centroids, history)
    return KMeansModel(best[0], feature_tag, seed, best[1])


def kmeans_assign(
    model: KMeansModel, feat: FeatureMatrix, utterance_id: str = ""
) -> TokenSequence:
    """Assign each frame to its nearest centroid (lowest index on ties)."""
    if feat.dim != model.dim:
        raise DimensionMismatch(
            f"feature dim {feat.dim} != model dim {model.dim}"
        )
    dist = _pairwise_sq_dist(feat.data, model.centroids)
    tokens = dist.argmin(axis=1).astype(np.int64)
    return TokenSequence(tokens, feat.frame_period_ms, utterance_id)


def deduplicate(seq: TokenSequence) -> TokenSequence:
    """Collapse runs of consecutive equal tokens; idempotent."""
    tokens = np.asarray(seq.tokens)
    if len(tokens) == 0:
        kept = tokens.copy()
    else:
        keep = np.ones(len(tokens), dtype=bool)
        keep[1:] = tokens[1:] != tokens[:-1]
        kept = tokens[keep]
    return TokenSequence(kept, seq.frame_period_ms, seq.utterance_id)


def save_model(model: KMeansModel, path):
    """Write a model to the little-endian "PBKM" format (f32 centroids)."""
    tag = model.feature_tag.encode("utf-8")
    header = struct.pack(
        "<4sHIIQH",
        MODEL_MAGIC,
        MODEL_VERSION,
        model.k,
        model.dim,
        model.train_seed,
        len(tag),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(tag)
        fh.write(model.centroids.astype("<f4").tobytes())


def load_model(path) -> KMeansModel:
    header_size = struct.calcsize("<4sHIIQH")
    with open(path, "rb") as fh:
        header = fh.read(header_size)
        if len(header) < header_size:
            raise BadMagic(f"{path}: truncated header")
        magic, version, k, dim, seed, tag_len = struct.unpack(
            "<4sHIIQH", header
        )
        if magic != MODEL_MAGIC:
            raise BadMagic(f"{path}: bad magic {magic!r}")
        if version != MODEL_VERSION:
            raise BadMagic(f"{path}: unsupported version {version}")
        tag = fh.read(tag_len).decode("utf-8")
        payload = fh.read()
    expected = 4 * k * dim
    if len(payload) != expected:
        raise DimensionMismatch(
            f"{path}: payload {len(payload)} bytes, header implies {expected}"
        )
    centroids = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if not np.all(np.isfinite(centroids)):
        raise NonFiniteValue(f"{path}: non-finite centroids")
    return KMeansModel(centroids.reshape(k, dim), tag, int(seed))


def check_token_range(seq: TokenSequence, k: int):
    tokens = np.asarray(seq.tokens)
    if len(tokens) and (tokens.min() < 0 or tokens.max() >= k):
        raise TokenOutOfRange(f"token outside [0, {k})")
