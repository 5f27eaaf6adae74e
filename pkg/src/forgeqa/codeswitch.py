"""Artificial code-switching by dictionary word-for-word substitution.

A word token changes if and only if its case-folded form is a dictionary
key. Gaps, punctuation and out-of-dictionary tokens pass through verbatim,
and gold answers are re-derived from the substituted context at the tracked
token positions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

from .corpus import Answer, Article, Paragraph, QaEntry, RcDataset, TransformTag
from .errors import DictionaryParseError
from .tokens import TokenSpan, TokenizerPolicy, is_word_token, remap_span, rewrite_tokens, tokenize

SCOPES = ("context", "question", "both")


@dataclass(frozen=True)
class BilingualDictionary:
    source_lang: str
    target_lang: str
    entries: Mapping[str, tuple[str, ...]]

    def lookup(self, word: str) -> tuple[str, ...] | None:
        return self.entries.get(word.casefold())

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class CodeSwitchReport:
    total_word_tokens: int
    substituted_tokens: int

    @property
    def ratio(self) -> float:
        if self.total_word_tokens == 0:
            return 0.0
        return self.substituted_tokens / self.total_word_tokens


def load_dictionary(
    data: bytes | str, source_lang: str = "src", target_lang: str = "tgt"
) -> BilingualDictionary:
    """Load a word-pair lexicon: one ``source<ws>target`` pair per line.

    Duplicate source words accumulate an ordered target list in file order;
    lookup keys are case-folded.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    entries: dict[str, list[str]] = {}
    for line_no, line in enumerate(data.split("\n"), 1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 2:
            raise DictionaryParseError(f"expected 2 fields, got {len(fields)}", line_no)
        source, target = fields
        entries.setdefault(source.casefold(), []).append(target)
    return BilingualDictionary(
        source_lang, target_lang, {k: tuple(v) for k, v in entries.items()}
    )


def _choose(targets: tuple[str, ...], choice: str, rng: random.Random | None) -> str:
    if choice == "first" or len(targets) == 1:
        return targets[0]
    if rng is None:
        raise ValueError("seeded choice requires an rng")
    return targets[rng.randrange(len(targets))]


def _substitute(span: TokenSpan, dictionary: BilingualDictionary, choice: str,
                rng: random.Random | None):
    new_texts = []
    flags = []
    for tok in span.tokens:
        targets = dictionary.lookup(tok.text) if is_word_token(tok.text) else None
        if targets:
            new_texts.append(_choose(targets, choice, rng))
            flags.append(1)
        else:
            new_texts.append(tok.text)
            flags.append(0)
    return new_texts, flags


def substitute_tokens(
    span: TokenSpan,
    dictionary: BilingualDictionary,
    choice: str = "first",
    rng: random.Random | None = None,
) -> tuple[str, tuple[int, ...]]:
    """Substituted text plus a 0/1 flag per token (punctuation is always 0)."""
    if choice not in ("first", "seeded"):
        raise ValueError(f"choice must be 'first' or 'seeded', got {choice!r}")
    new_texts, flags = _substitute(span, dictionary, choice, rng)
    return rewrite_tokens(span, new_texts).text, tuple(flags)


def codeswitch_dataset(
    d: RcDataset,
    dictionary: BilingualDictionary,
    scope: str = "both",
    choice: str = "first",
    seed: int | None = None,
    policy: TokenizerPolicy = TokenizerPolicy.MIXED,
    extra_tag_params: dict | None = None,
) -> tuple[RcDataset, CodeSwitchReport]:
    """Apply dictionary substitution over the chosen scope and report the ratio.

    The substitution ratio counts word tokens of every field in scope. With
    ``choice="first"`` no seed is involved; seeded choice draws uniformly
    among a key's translations in document order, reproducibly.
    """
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}, got {scope!r}")
    if choice not in ("first", "seeded"):
        raise ValueError(f"choice must be 'first' or 'seeded', got {choice!r}")
    rng = random.Random(seed) if choice == "seeded" else None
    params = {
        "scope": scope,
        "choice": choice,
        "seed": seed if choice == "seeded" else None,
        "source_lang": dictionary.source_lang,
        "target_lang": dictionary.target_lang,
        "policy": policy.value,
    }
    if extra_tag_params:
        params.update(extra_tag_params)
    tag = TransformTag("codeswitch", params)
    total = 0
    substituted = 0
    articles = []
    for article in d.articles:
        paragraphs = []
        for paragraph in article.paragraphs:
            context = paragraph.context
            span = tokenize(context, policy)
            if scope in ("context", "both"):
                new_texts, flags = _substitute(span, dictionary, choice, rng)
                rewrite = rewrite_tokens(span, new_texts)
                word = [is_word_token(t.text) for t in span.tokens]
                total += sum(word)
                substituted += sum(f for f, w in zip(flags, word) if w)
                context = rewrite.text
            else:
                rewrite = None
            qas = []
            for qa in paragraph.qas:
                question = qa.question
                if scope in ("question", "both"):
                    q_span = tokenize(question, policy)
                    q_texts, q_flags = _substitute(q_span, dictionary, choice, rng)
                    q_word = [is_word_token(t.text) for t in q_span.tokens]
                    total += sum(q_word)
                    substituted += sum(f for f, w in zip(q_flags, q_word) if w)
                    question = rewrite_tokens(q_span, q_texts).text
                answers = qa.answers
                if rewrite is not None:
                    remapped = []
                    for ans in qa.answers:
                        s, e = remap_span(
                            span, rewrite, ans.answer_start, ans.answer_start + len(ans.text)
                        )
                        remapped.append(Answer(rewrite.text[s:e], s))
                    answers = tuple(remapped)
                qas.append(
                    QaEntry(qa.id, question, answers, qa.lineage + (tag,), qa.noise_flag)
                )
            paragraphs.append(Paragraph(context, tuple(qas)))
        articles.append(Article(article.title, tuple(paragraphs)))
    return RcDataset(d.version, tuple(articles)), CodeSwitchReport(total, substituted)
