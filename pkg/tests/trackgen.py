import numpy as np

from prosody_bench.vocoder import ParamTrack


def random_track(rng, n_frames=None, n_bins=None, f32_exact=False):
    """A random valid ParamTrack with a voiced/unvoiced mix."""
    n_frames = n_frames or int(rng.integers(8, 40))
    n_bins = n_bins or int(rng.integers(8, 40))
    f0 = np.where(rng.random(n_frames) < 0.7,
                  rng.uniform(60.0, 300.0, n_frames), 0.0)
    sp = rng.uniform(1e-3, 5.0, (n_frames, n_bins))
    ap = rng.uniform(0.0, 1.0, (n_frames, n_bins))
    if f32_exact:
        f0 = f0.astype(np.float32).astype(np.float64)
        sp = sp.astype(np.float32).astype(np.float64)
        ap = ap.astype(np.float32).astype(np.float64)
    return ParamTrack(f0, sp, ap, 5.0, 16000)
