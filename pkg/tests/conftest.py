from __future__ import annotations

import pytest

from helion import EventCorpus, EventSequence, ModelConfig, Token, train
from helion.demo import default_vocabulary, demo_corpus

_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance_results.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results:
        label = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{label}: {name}")


def make_token(text: str) -> Token:
    device, attribute, action = text.split(",")
    return Token(device, attribute, action)


@pytest.fixture(scope="session")
def toy_tokens():
    """A, B, C, D over one device attribute."""
    return tuple(make_token(f"dev,attr,s{x}") for x in "abcd")


@pytest.fixture(scope="session")
def toy_corpus(toy_tokens):
    a, b, c, d = toy_tokens
    return EventCorpus(
        sequences=(
            EventSequence(tokens=(a, b, c)),
            EventSequence(tokens=(a, b, d)),
        )
    )


@pytest.fixture(scope="session")
def toy_model(toy_corpus):
    return train(toy_corpus, ModelConfig(order=2))


@pytest.fixture(scope="session")
def demo_vocab():
    return default_vocabulary()


@pytest.fixture(scope="session")
def demo_event_corpus():
    return demo_corpus()


@pytest.fixture(scope="session")
def demo_model(demo_event_corpus):
    return train(demo_event_corpus, ModelConfig(order=3))
