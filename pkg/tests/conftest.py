import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """A 3-speaker, 3-sentence synthetic corpus shared across tests."""
    from prosody_bench.corpus import generate_synthetic_corpus

    out = tmp_path_factory.mktemp("corpus")
    manifest = generate_synthetic_corpus(3, 3, 8, seed=11, out_dir=str(out))
    return manifest
