import warnings

import pytest

from ctcfusion.textnorm import build_alphabet
from ctcfusion.toylang import make_sentences

# Fallback-discount warnings are expected on tiny corpora.
warnings.filterwarnings("ignore", message=".*degenerate count-of-counts.*")


@pytest.fixture(scope="session")
def toy_sentences():
    return make_sentences(500, seed=7)


@pytest.fixture(scope="session")
def toy_alphabet(toy_sentences):
    return build_alphabet(toy_sentences)
