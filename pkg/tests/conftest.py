import pytest

from planrag.corpus import generate_corpus


@pytest.fixture(scope="session")
def small_corpus():
    """A 30-persona corpus shared by tests that only need a valid dataset."""
    return generate_corpus(seed=11, n_personas=30)


@pytest.fixture(scope="session")
def toy_docs():
    return [
        ("d1", "guitar class monday"),
        ("d2", "buy milk"),
        ("d3", "guitar tuner review"),
    ]
