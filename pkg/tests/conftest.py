"""Shared fixtures: backends, token builders, and micro corpora."""

from __future__ import annotations

import random

import pytest

from blanclab.backends.reference import ReferenceBackend, surface_id
from blanclab.tokenization import Token, TokenizedText, TokenKind


@pytest.fixture
def backend() -> ReferenceBackend:
    return ReferenceBackend()


def make_token(surface: str, kind: TokenKind = TokenKind.NORMAL) -> Token:
    return Token(surface, len(surface), kind, surface_id(surface))


def make_sentence(*surfaces: str) -> tuple[Token, ...]:
    return tuple(make_token(s) for s in surfaces)


def make_text(*sentences: tuple[str, ...]) -> TokenizedText:
    return TokenizedText(sentences=tuple(make_sentence(*s) for s in sentences))


def plain_tokens(sentence) -> list[tuple[str, int, str, int]]:
    """Library tokens -> the plain-tuple form the enumerator oracle consumes."""
    return [(t.surface, t.char_len, t.kind.value, t.vocab_id) for t in sentence]


def plain_text(text: TokenizedText) -> list[list[tuple[str, int, str, int]]]:
    return [plain_tokens(s) for s in text.sentences]


WORD_POOL = [
    "market", "gardens", "harbors", "violets", "thunder", "granite",
    "meadow", "lantern", "orchard", "pebble", "willow", "copper",
    "fox", "hen", "owl", "elm", "sky", "sea",
]


def random_text(rng: random.Random, max_sentences: int = 3, max_tokens: int = 8) -> str:
    sentences = []
    for _ in range(rng.randint(1, max_sentences)):
        words = [rng.choice(WORD_POOL) for _ in range(rng.randint(1, max_tokens - 1))]
        sentences.append(" ".join(words) + ".")
    return " ".join(sentences)
