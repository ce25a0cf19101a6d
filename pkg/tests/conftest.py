import numpy as np
import pytest

from affordance.embeddings import EmbeddingStore, Lexicon
from affordance.synthetic import bundled_lexicon, bundled_store


@pytest.fixture(scope="session")
def store():
    return bundled_store()


@pytest.fixture(scope="session")
def lexicon():
    return bundled_lexicon()


@pytest.fixture
def tiny_store():
    return EmbeddingStore(["a", "b"], [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def random_tokens_store(rng: np.random.Generator, n: int, dim: int) -> EmbeddingStore:
    toks = [f"t{i:02d}" for i in range(n)]
    return EmbeddingStore(toks, rng.standard_normal((n, dim)))


@pytest.fixture
def small_lexicon():
    return Lexicon(verbs=("take", "eat", "open"), nouns=("apple", "door", "pill", "key"),
                   adjectives=frozenset({"red", "blue", "small"}))


# --- acceptance reporting ------------------------------------------------------------
# tests marked @pytest.mark.criterion(n, "text") get one PASS/FAIL/SKIP line each

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when not in ("setup", "call"):
        return
    n, text = mark.args
    if call.excinfo is None:
        if call.when == "call":
            _criteria[n] = ("PASS", text)
    elif call.excinfo.errisinstance(pytest.skip.Exception):
        _criteria[n] = ("SKIP", text)
    else:
        _criteria[n] = ("FAIL", text)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        status, text = _criteria[n]
        terminalreporter.write_line(f"criterion {n:>2}: {status}  {text}")
