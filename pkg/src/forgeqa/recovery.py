"""Fuzzy answer-span relocation by minimal edit distance over code points.

The search is exact: it returns the same span as brute-force enumeration of
every substring, under the tie-break chain (distance, span length, distance
of the start to a position hint, leftmost). The forward pass is the
free-start alignment DP (a row of zeros lets the match begin anywhere); the
winning starts are then reconstructed only around optimal end positions,
which is cheap because an optimal span's length can differ from the query's
by at most the distance itself.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .corpus import Answer, QaEntry, TransformTag
from .errors import NoMatchError, TriplesParseError
from . import tsv


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit insert/delete/substitute costs."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@dataclass(frozen=True)
class SpanMatch:
    start: int
    end: int
    distance: int
    matched_text: str


@dataclass(frozen=True)
class RecoveryPolicy:
    """Threshold rule min(cap, m-1) plus the drop-vs-noise mode."""

    cap: int = 10
    mode: str = "train"  # "train" drops over-threshold examples, "test" keeps+flags

    def __post_init__(self):
        if self.mode not in ("train", "test"):
            raise ValueError(f"mode must be 'train' or 'test', got {self.mode!r}")

    def threshold(self, answer_len: int) -> int:
        return min(self.cap, answer_len - 1)


def _free_start_row(codes: np.ndarray, answer: str) -> np.ndarray:
    """Final DP row: row[j] = min over s of dist(answer, context[s:j])."""
    n = codes.shape[0]
    idx = np.arange(n + 1, dtype=np.int64)
    cur = np.zeros(n + 1, dtype=np.int64)
    for ch in answer:
        prev = cur
        v = np.empty(n + 1, dtype=np.int64)
        v[0] = prev[0] + 1
        cost = (codes != ord(ch)).astype(np.int64)
        v[1:] = np.minimum(prev[:-1] + cost, prev[1:] + 1)
        # fold in the left-neighbor (insertion) transition with a prefix scan
        cur = np.minimum.accumulate(v - idx) + idx
    return cur


def _prefix_distances(a: str, b: str) -> list[int]:
    """dist(a, b[:j]) for every prefix length j."""
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev


def best_span_search(context: str, answer: str, position_hint: int = 0) -> SpanMatch:
    """Minimal-edit-distance span of ``context`` for ``answer``.

    Ties break toward the shortest span, then the start closest to
    ``position_hint``, then leftmost. Only non-empty spans are considered.
    """
    if not answer:
        raise ValueError("answer must be non-empty")
    if not context:
        raise NoMatchError("cannot search for a span in an empty context")
    m = len(answer)
    codes = np.fromiter((ord(c) for c in context), dtype=np.int64, count=len(context))
    row = _free_start_row(codes, answer)
    d_star = int(row[1:].min())
    rev_answer = answer[::-1]
    best: tuple[int, int, int] | None = None  # (length, |start-hint|, start)
    for e in (np.nonzero(row[1:] == d_star)[0] + 1).tolist():
        # span lengths outside [m-d*, m+d*] cannot reach distance d*
        max_len = min(e, m + d_star)
        min_len = max(1, m - d_star)
        if min_len > max_len:
            continue
        dists = _prefix_distances(rev_answer, context[e - max_len:e][::-1])
        for length in range(min_len, max_len + 1):
            if dists[length] == d_star:
                start = e - length
                key = (length, abs(start - position_hint), start)
                if best is None or key < best:
                    best = key
    assert best is not None  # some non-empty span always attains d_star
    length, _, start = best
    return SpanMatch(start, start + length, d_star, context[start:start + length])


@dataclass(frozen=True)
class RecoveryResult:
    qa: QaEntry | None  # None when the example was dropped
    match: SpanMatch
    over_threshold: bool

    @property
    def dropped(self) -> bool:
        return self.qa is None


def recover_example(
    qa: QaEntry,
    new_context: str,
    translated_answer: str,
    policy: RecoveryPolicy,
    position_hint: int = 0,
    extra_tag_params: dict | None = None,
) -> RecoveryResult:
    """Relocate one translated answer, applying the drop/noise policy.

    Within threshold the qa's answer is rewritten to the matched span; over
    threshold the example is dropped in train mode, or kept with the noise
    flag and the best-effort span in test mode.
    """
    match = best_span_search(new_context, translated_answer, position_hint)
    over = match.distance > policy.threshold(len(translated_answer))
    params = {"mode": policy.mode, "cap": policy.cap, "distance": match.distance}
    if extra_tag_params:
        params.update(extra_tag_params)
    tag = TransformTag("recover", params)
    if over and policy.mode == "train":
        return RecoveryResult(None, match, True)
    updated = replace(
        qa,
        answers=(Answer(match.matched_text, match.start),),
        noise_flag=qa.noise_flag or over,
        lineage=qa.lineage + (tag,),
    )
    return RecoveryResult(updated, match, over)


@dataclass(frozen=True)
class TranslationTriple:
    qa_id: str
    context: str
    question: str
    answer: str
    src_lang: str
    tgt_lang: str

    @property
    def failed(self) -> bool:
        # the translation client marks unusable rows by leaving the answer empty
        return self.answer == ""


def parse_triples(text: str) -> list[TranslationTriple]:
    """Read a translated-triples TSV: id, context, question, answer, src, tgt."""
    triples = []
    for line_no, line in enumerate(text.split("\n"), 1):
        if not line or line.startswith("#"):
            continue
        fields = tsv.parse_row(line)
        if len(fields) != 6:
            raise TriplesParseError(f"expected 6 fields, got {len(fields)}", line_no)
        triples.append(TranslationTriple(*fields))
    return triples


def format_triples(triples: list[TranslationTriple]) -> str:
    lines = [
        tsv.format_row((t.qa_id, t.context, t.question, t.answer, t.src_lang, t.tgt_lang))
        for t in triples
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def recover_dataset(
    d,
    triples: list[TranslationTriple],
    policy: RecoveryPolicy,
    extra_tag_params: dict | None = None,
):
    """Rebuild a dataset from translated triples, one paragraph per example.

    Triples are matched to qa entries by id; a missing triple, or one with an
    empty context or answer, counts as failed and follows the same drop/noise
    policy as an over-threshold match. Returns the new dataset plus counts.
    """
    from .corpus import Article, Paragraph, RcDataset

    index: dict[str, TranslationTriple] = {}
    for t in triples:
        if t.qa_id in index:
            raise TriplesParseError(f"duplicate triple id {t.qa_id!r}", 0)
        index[t.qa_id] = t
    counts = {"total": 0, "recovered": 0, "exact": 0, "dropped": 0, "noise": 0, "failed": 0}
    articles = []
    for article in d.articles:
        paragraphs = []
        for paragraph in article.paragraphs:
            for qa in paragraph.qas:
                counts["total"] += 1
                triple = index.get(qa.id)
                failed = triple is None or triple.failed or not triple.context
                if failed:
                    counts["failed"] += 1
                    if policy.mode == "train":
                        counts["dropped"] += 1
                        continue
                    params = {"mode": policy.mode, "cap": policy.cap, "failed": True}
                    if extra_tag_params:
                        params.update(extra_tag_params)
                    context = triple.context if triple is not None and triple.context else paragraph.context
                    question = triple.question if triple is not None and triple.question else qa.question
                    noisy = replace(
                        qa,
                        question=question,
                        answers=(),
                        noise_flag=True,
                        lineage=qa.lineage + (TransformTag("recover", params),),
                    )
                    counts["noise"] += 1
                    paragraphs.append(Paragraph(context, (noisy,)))
                    continue
                hint = 0
                if qa.answers and paragraph.context:
                    hint = round(
                        qa.answers[0].answer_start / len(paragraph.context) * len(triple.context)
                    )
                candidate = replace(qa, question=triple.question)
                result = recover_example(
                    candidate, triple.context, triple.answer, policy, hint, extra_tag_params
                )
                if result.dropped:
                    counts["dropped"] += 1
                    continue
                if result.over_threshold:
                    counts["noise"] += 1
                else:
                    counts["recovered"] += 1
                    if result.match.distance == 0:
                        counts["exact"] += 1
                paragraphs.append(Paragraph(triple.context, (result.qa,)))
        if paragraphs:
            articles.append(Article(article.title, tuple(paragraphs)))
    return RcDataset(d.version, tuple(articles)), counts
