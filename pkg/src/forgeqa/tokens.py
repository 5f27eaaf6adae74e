"""Offset-preserving tokenizers and the span rewriting machinery built on them.

Three policies cover the corpora handled here: whitespace languages
(``space``), character-level CJK (``cjk``), and text mixing both
(``mixed``). Tokens always record code-point offsets into the source text,
and the text outside tokens is whitespace only, so rebuilding a string
after token replacement is exact.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum

from .errors import DatasetIntegrityError


class TokenizerPolicy(str, Enum):
    SPACE = "space"
    CJK = "cjk"
    MIXED = "mixed"


# Han ideographs plus kana. Hangul is deliberately absent: Korean words are
# space-delimited and are scored and substituted as whole words.
_CJK_RANGES = (
    (0x3040, 0x30FF),
    (0x31F0, 0x31FF),
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2FA1F),
)


def is_cjk_char(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def is_punct_char(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def is_word_token(text: str) -> bool:
    """Word tokens carry at least one non-punctuation character."""
    return any(not is_punct_char(ch) for ch in text)


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenSpan:
    text: str
    tokens: tuple[Token, ...]

    def reconstruct(self) -> str:
        """Rebuild the source text from tokens and inter-token gaps."""
        parts = []
        pos = 0
        for tok in self.tokens:
            parts.append(self.text[pos:tok.start])
            parts.append(tok.text)
            pos = tok.end
        parts.append(self.text[pos:])
        return "".join(parts)

    def word_indices(self) -> list[int]:
        return [i for i, t in enumerate(self.tokens) if is_word_token(t.text)]


def _nonspace_runs(text: str):
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                yield start, i
                start = None
        elif start is None:
            start = i
    if start is not None:
        yield start, len(text)


def _split_segment(text: str, start: int, end: int, out: list[Token]) -> None:
    """Append a non-CJK segment, peeling leading/trailing punctuation chars."""
    a, b = start, end
    while a < b and is_punct_char(text[a]):
        out.append(Token(text[a], a, a + 1))
        a += 1
    trailing = []
    while b > a and is_punct_char(text[b - 1]):
        trailing.append(Token(text[b - 1], b - 1, b))
        b -= 1
    if a < b:
        out.append(Token(text[a:b], a, b))
    out.extend(reversed(trailing))


def tokenize(text: str, policy: TokenizerPolicy = TokenizerPolicy.MIXED) -> TokenSpan:
    policy = TokenizerPolicy(policy)
    tokens: list[Token] = []
    if policy is TokenizerPolicy.CJK:
        for i, ch in enumerate(text):
            if not ch.isspace():
                tokens.append(Token(ch, i, i + 1))
    elif policy is TokenizerPolicy.SPACE:
        for s, e in _nonspace_runs(text):
            _split_segment(text, s, e, tokens)
    else:
        for s, e in _nonspace_runs(text):
            seg = s
            for i in range(s, e):
                if is_cjk_char(text[i]):
                    if seg < i:
                        _split_segment(text, seg, i, tokens)
                    tokens.append(Token(text[i], i, i + 1))
                    seg = i + 1
            if seg < e:
                _split_segment(text, seg, e, tokens)
    return TokenSpan(text, tuple(tokens))


@dataclass(frozen=True)
class RewriteResult:
    """Text rebuilt after per-token replacement, with new token offsets."""

    text: str
    starts: tuple[int, ...]
    ends: tuple[int, ...]


def rewrite_tokens(span: TokenSpan, new_texts: list[str] | tuple[str, ...]) -> RewriteResult:
    """Replace each token's text, keeping all inter-token gaps verbatim."""
    if len(new_texts) != len(span.tokens):
        raise ValueError("replacement list does not match token count")
    parts: list[str] = []
    starts: list[int] = []
    ends: list[int] = []
    pos = 0
    prev_end = 0
    for tok, new in zip(span.tokens, new_texts):
        gap = span.text[prev_end:tok.start]
        parts.append(gap)
        pos += len(gap)
        starts.append(pos)
        parts.append(new)
        pos += len(new)
        ends.append(pos)
        prev_end = tok.end
    parts.append(span.text[prev_end:])
    return RewriteResult("".join(parts), tuple(starts), tuple(ends))


def remap_span(span: TokenSpan, rewrite: RewriteResult, start: int, end: int) -> tuple[int, int]:
    """Map a source character span onto the rewritten text.

    The span snaps outward to the boundaries of the tokens it overlaps:
    a fragment of a replaced token has no meaningful image of its own.
    """
    covering = [i for i, t in enumerate(span.tokens) if t.start < end and t.end > start]
    if not covering:
        raise DatasetIntegrityError(
            f"span [{start}, {end}) overlaps no token and cannot be remapped"
        )
    return rewrite.starts[covering[0]], rewrite.ends[covering[-1]]
