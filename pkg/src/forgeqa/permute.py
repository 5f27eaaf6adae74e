"""Synthetic unseen languages via seeded bijective vocabulary permutation.

Word types collected from contexts and questions are shuffled onto each
other; punctuation-only tokens and whitespace are fixed points. With the
default derangement requirement no type maps to itself, so no surface token
of the source language survives.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping

from .corpus import Answer, Article, Paragraph, QaEntry, RcDataset, TransformTag
from .errors import CoverageError
from .tokens import TokenizerPolicy, is_word_token, remap_span, rewrite_tokens, tokenize
from . import tsv

_MAX_RESHUFFLES = 10_000  # derangement probability per shuffle is ~1/e


@dataclass(frozen=True)
class PermutationTable:
    vocabulary: tuple[str, ...]
    mapping: Mapping[str, str]
    seed: int | None
    policy: TokenizerPolicy
    derangement_required: bool

    def fixed_points(self) -> list[str]:
        return [w for w in self.vocabulary if self.mapping[w] == w]

    def inverse(self) -> "PermutationTable":
        inverted = {image: source for source, image in self.mapping.items()}
        return PermutationTable(
            self.vocabulary, inverted, self.seed, self.policy, self.derangement_required
        )


def build_vocab(d: RcDataset, policy: TokenizerPolicy) -> tuple[str, ...]:
    """Sorted word types of all contexts and questions under the policy."""
    types: set[str] = set()
    for article in d.articles:
        for paragraph in article.paragraphs:
            texts = [paragraph.context] + [qa.question for qa in paragraph.qas]
            for text in texts:
                for tok in tokenize(text, policy).tokens:
                    if is_word_token(tok.text):
                        types.add(tok.text)
    return tuple(sorted(types))


def build_permutation(
    vocab: tuple[str, ...] | list[str],
    seed: int | None,
    derangement: bool = True,
    policy: TokenizerPolicy = TokenizerPolicy.MIXED,
) -> PermutationTable:
    """Seeded Fisher-Yates permutation of the vocabulary.

    ``seed=None`` is the reserved identity configuration and requires
    ``derangement=False``. With derangement on, shuffling repeats until no
    type maps to itself (a few tries in expectation).
    """
    vocab = tuple(vocab)
    if len(set(vocab)) != len(vocab):
        raise ValueError("vocabulary contains duplicate types")
    if seed is None:
        if derangement:
            raise ValueError(
                "a seed is required unless building the identity table "
                "(identity needs derangement=False / --allow-fixed-points)"
            )
        return PermutationTable(vocab, {w: w for w in vocab}, None, policy, False)
    if derangement and len(vocab) < 2:
        raise ValueError("derangement needs at least 2 vocabulary types")
    rng = random.Random(seed)
    images = list(vocab)
    for _ in range(_MAX_RESHUFFLES):
        rng.shuffle(images)
        if not derangement or all(w != img for w, img in zip(vocab, images)):
            return PermutationTable(
                vocab, dict(zip(vocab, images)), seed, policy, derangement
            )
    raise RuntimeError("no derangement found; vocabulary too small?")


def _permute_text(text: str, table: PermutationTable):
    span = tokenize(text, table.policy)
    new_texts = []
    for tok in span.tokens:
        if not is_word_token(tok.text):
            new_texts.append(tok.text)
            continue
        image = table.mapping.get(tok.text)
        if image is None:
            raise CoverageError(tok.text)
        new_texts.append(image)
    return span, rewrite_tokens(span, new_texts)


def apply_permutation(
    d: RcDataset, table: PermutationTable, extra_tag_params: dict | None = None
) -> RcDataset:
    """Replace every word token in contexts and questions with its image.

    Answer offsets are recomputed from the permuted context (snapping to the
    covering tokens), so the substring invariant keeps holding.
    """
    params = {
        "seed": table.seed,
        "policy": table.policy.value,
        "derangement": table.derangement_required,
    }
    if extra_tag_params:
        params.update(extra_tag_params)
    tag = TransformTag("permute", params)
    articles = []
    for article in d.articles:
        paragraphs = []
        for paragraph in article.paragraphs:
            span, rewrite = _permute_text(paragraph.context, table)
            qas = []
            for qa in paragraph.qas:
                answers = []
                for ans in qa.answers:
                    s, e = remap_span(span, rewrite, ans.answer_start, ans.answer_start + len(ans.text))
                    answers.append(Answer(rewrite.text[s:e], s))
                _, q_rewrite = _permute_text(qa.question, table)
                qas.append(
                    QaEntry(qa.id, q_rewrite.text, tuple(answers), qa.lineage + (tag,), qa.noise_flag)
                )
            paragraphs.append(Paragraph(rewrite.text, tuple(qas)))
        articles.append(Article(article.title, tuple(paragraphs)))
    return RcDataset(d.version, tuple(articles))


def format_table(table: PermutationTable) -> str:
    """Two-column audit TSV: source type, image type."""
    lines = [tsv.format_row((w, table.mapping[w])) for w in table.vocabulary]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_table(
    text: str,
    policy: TokenizerPolicy = TokenizerPolicy.MIXED,
    seed: int | None = None,
    derangement_required: bool = False,
) -> PermutationTable:
    mapping: dict[str, str] = {}
    for line_no, line in enumerate(text.split("\n"), 1):
        if not line:
            continue
        fields = tsv.parse_row(line)
        if len(fields) != 2:
            raise ValueError(f"table line {line_no}: expected 2 columns, got {len(fields)}")
        source, image = fields
        if source in mapping:
            raise ValueError(f"table line {line_no}: duplicate source {source!r}")
        mapping[source] = image
    if set(mapping) != set(mapping.values()):
        raise ValueError("table is not a bijection over one vocabulary")
    return PermutationTable(
        tuple(sorted(mapping)), mapping, seed, policy, derangement_required
    )
