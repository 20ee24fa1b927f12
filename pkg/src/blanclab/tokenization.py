"""Sentence segmentation and classified tokens.

The toolkit never embeds a vocabulary of its own: surfaces and vocabulary ids
come from a model backend, so that token ids always match the model that
scores them.  What lives here is backend-independent: splitting raw text into
sentences (a fixed, deterministic rule set), and the Normal/Lead/Follow
classification that masking eligibility is defined over.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import BackendError

if TYPE_CHECKING:  # pragma: no cover
    from .backends.base import ModelBackend


class TokenKind(str, Enum):
    """How a wordpiece relates to the word it belongs to.

    NORMAL: a word the vocabulary keeps whole.
    LEAD:   the first piece of a word split into several pieces.
    FOLLOW: a continuation piece of a split word.
    """

    NORMAL = "normal"
    LEAD = "lead"
    FOLLOW = "follow"


#: Marker real wordpiece vocabularies prepend to continuation pieces.
CONTINUATION_MARKER = "##"


@dataclass(frozen=True)
class Token:
    """One wordpiece: visible surface (marker stripped), kind, vocabulary id."""

    surface: str
    char_len: int
    kind: TokenKind
    vocab_id: int

    def __post_init__(self) -> None:
        if self.char_len < 1:
            raise ValueError(f"token char_len must be >= 1, got {self.char_len}")
        if self.char_len != len(self.surface):
            raise ValueError(
                f"char_len {self.char_len} does not match surface {self.surface!r}"
            )


Sentence = tuple[Token, ...]


@dataclass(frozen=True)
class TokenizedText:
    """Sentences of classified tokens, in document order. Sentences are non-empty."""

    sentences: tuple[Sentence, ...]

    def __post_init__(self) -> None:
        for i, sent in enumerate(self.sentences):
            if not sent:
                raise ValueError(f"sentence {i} is empty")

    @property
    def token_count(self) -> int:
        return sum(len(s) for s in self.sentences)

    def all_tokens(self) -> list[Token]:
        return [t for s in self.sentences for t in s]

    def all_ids(self) -> list[int]:
        return [t.vocab_id for s in self.sentences for t in s]


# --------------------------------------------------------------------------
# Sentence segmentation
# --------------------------------------------------------------------------

# Words after which a terminating period does not end a sentence.  Entries are
# lowercase and written without the final period ("e.g" keeps its inner dot).
_ABBREVIATIONS = frozenset({
    "dr", "mr", "mrs", "ms", "prof", "rev", "hon", "sr", "jr", "st",
    "gen", "col", "lt", "sgt", "capt", "cmdr", "maj", "gov", "sen", "rep",
    "vs", "etc", "inc", "ltd", "co", "corp", "dept", "univ", "est",
    "fig", "figs", "no", "nos", "vol", "vols", "pp", "ed", "eds", "al",
    "e.g", "i.e", "cf", "ca", "approx", "a.m", "p.m",
    "u.s", "u.k", "u.n", "u.s.a",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct",
    "nov", "dec", "mon", "tue", "wed", "thu", "fri", "sat", "sun",
})

_TERMINATOR_RE = re.compile(r"[.!?]+[\"'”’)\]]*")
_PRECEDING_WORD_RE = re.compile(r"[\w.]+$")
_STARTERS = "\"'“‘([$"


def _is_starter(ch: str) -> bool:
    return ch.isupper() or ch.isdigit() or ch in _STARTERS


def _blocks_split(block: str, term_start: int) -> bool:
    """True when an abbreviation or initial sits right before the terminator."""
    m = _PRECEDING_WORD_RE.search(block, 0, term_start)
    if m is None:
        return False
    word = m.group()
    if len(word) == 1 and word.isalpha():
        return True
    return word.lower() in _ABBREVIATIONS


def _split_block(block: str) -> list[str]:
    pieces: list[str] = []
    start = 0
    for m in _TERMINATOR_RE.finditer(block):
        end = m.end()
        if end >= len(block) or not block[end].isspace():
            continue
        follow = end
        while follow < len(block) and block[follow].isspace():
            follow += 1
        if follow >= len(block) or not _is_starter(block[follow]):
            continue
        if _blocks_split(block, m.start()):
            continue
        pieces.append(block[start:end])
        start = follow
    tail = block[start:]
    if tail.strip():
        pieces.append(tail)
    return pieces


def segment_sentences(text: str) -> list[str]:
    """Split raw text into sentences with a fixed deterministic rule set.

    Terminator punctuation ends a sentence when followed by whitespace and an
    uppercase/digit/quote starter, unless the preceding word is a known
    abbreviation or a single initial.  Newlines are hard boundaries.  Internal
    whitespace is normalized to single spaces; no non-whitespace content is
    dropped.  Empty or whitespace-only input yields an empty list.
    """
    sentences: list[str] = []
    for block in re.split(r"\n+", text):
        block = block.strip()
        if not block:
            continue
        for piece in _split_block(block):
            normalized = " ".join(piece.split())
            if normalized:
                sentences.append(normalized)
    return sentences


# --------------------------------------------------------------------------
# Token classification
# --------------------------------------------------------------------------

def strip_marker(piece: str) -> str:
    """Remove the continuation marker from a wordpiece surface, if present."""
    if piece.startswith(CONTINUATION_MARKER) and len(piece) > len(CONTINUATION_MARKER):
        return piece[len(CONTINUATION_MARKER):]
    return piece


def classify_pieces(pieces: Sequence[str]) -> list[tuple[str, TokenKind]]:
    """Classify the pieces of ONE word into (stripped surface, kind) pairs.

    A one-piece word is Normal; a multi-piece word is one Lead followed by
    Follow pieces.  Continuation markers on the input surfaces are stripped.
    """
    if not pieces:
        return []
    if len(pieces) == 1:
        return [(strip_marker(pieces[0]), TokenKind.NORMAL)]
    out = [(strip_marker(pieces[0]), TokenKind.LEAD)]
    out.extend((strip_marker(p), TokenKind.FOLLOW) for p in pieces[1:])
    return out


def _validate_kind_pattern(tokens: Sequence[Token], sentence_index: int) -> None:
    """Enforce the regular word pattern: Normal | Lead Follow+ ."""
    prev: TokenKind | None = None
    for pos, tok in enumerate(tokens):
        if tok.kind is TokenKind.FOLLOW:
            if prev not in (TokenKind.LEAD, TokenKind.FOLLOW):
                raise BackendError(
                    f"sentence {sentence_index}, token {pos}: Follow token "
                    f"{tok.surface!r} does not continue a Lead"
                )
        if prev is TokenKind.LEAD and tok.kind is not TokenKind.FOLLOW:
            raise BackendError(
                f"sentence {sentence_index}, token {pos}: Lead token must be "
                f"followed by a Follow token"
            )
        prev = tok.kind
    if prev is TokenKind.LEAD:
        raise BackendError(
            f"sentence {sentence_index}: sentence ends on a Lead token"
        )


def tokenize(sentences: Iterable[str], backend: "ModelBackend") -> TokenizedText:
    """Tokenize sentences through a backend into classified tokens.

    Empty sentences (nothing tokenizable) are dropped; kind-pattern and
    char_len invariants of the backend output are validated here.
    """
    sentence_list = [s for s in sentences]
    raw = backend.tokenize_sentences(sentence_list) if sentence_list else []
    kept: list[Sentence] = []
    for i, toks in enumerate(raw):
        if not toks:
            continue
        _validate_kind_pattern(toks, i)
        kept.append(tuple(toks))
    return TokenizedText(sentences=tuple(kept))


def tokenize_text(text: str, backend: "ModelBackend") -> TokenizedText:
    """Segment raw text into sentences, then tokenize through the backend."""
    return tokenize(segment_sentences(text), backend)
