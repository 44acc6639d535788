"""Access to the packaged demo dataset (vocabulary, routines, policies)."""

from __future__ import annotations

from importlib import resources

from .scheduling import EventCorpus, UserRoutines, corpus_from_users, load_user_routines
from .simulator import PlatformState, PolicyRule, load_policies
from .tokens import Vocabulary, load_vocabulary

DEMO_DAYS = 30
DEMO_SEED = 0


def data_text(name: str) -> str:
    return (resources.files("helion") / "data" / name).read_text(encoding="utf-8")


def default_vocabulary() -> Vocabulary:
    return load_vocabulary(data_text("vocabulary.tsv"))


def demo_users(vocab: Vocabulary | None = None) -> list[UserRoutines]:
    vocab = vocab if vocab is not None else default_vocabulary()
    return load_user_routines(data_text("demo_users.json"), vocab)


def demo_corpus(days: int = DEMO_DAYS, base_seed: int = DEMO_SEED) -> EventCorpus:
    return corpus_from_users(demo_users(), days=days, base_seed=base_seed)


def demo_policies(ps: PlatformState) -> list[PolicyRule]:
    return load_policies(data_text("policies.json"), ps)
