"""Dependency-tree re-linearization into a target subject/verb/object order.

Sentences arrive as dependency parses (CoNLL-U); each head with a subject or
object dependent re-emits its children as three slots ordered by the target
pattern, every subtree moving as one contiguous block. Datasets are rebuilt
from the re-linearized tokens and answers are re-located fuzzily.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .corpus import Answer, Article, Paragraph, QaEntry, RcDataset, TransformTag
from .errors import AlignmentError, ConlluError
from .recovery import RecoveryPolicy, best_span_search

SUBJECT_RELS = frozenset({"nsubj", "nsubj:pass", "csubj", "csubj:pass",
                          "nsubjpass", "csubjpass"})
OBJECT_RELS = frozenset({"obj", "dobj", "iobj"})


class OrderPattern(str, Enum):
    SVO = "svo"
    SOV = "sov"
    VOS = "vos"
    VSO = "vso"
    OSV = "osv"
    OVS = "ovs"


@dataclass(frozen=True)
class DepToken:
    index: int  # 1-based
    form: str
    head: int  # 0 for the root
    deprel: str


@dataclass(frozen=True)
class DepSentence:
    tokens: tuple[DepToken, ...]

    def root_index(self) -> int:
        return next(t.index for t in self.tokens if t.head == 0)


def _validate_tree(tokens: list[DepToken], sentence_index: int) -> None:
    n = len(tokens)
    roots = [t for t in tokens if t.head == 0]
    if not roots:
        raise ConlluError("no root token", sentence_index)
    if len(roots) > 1:
        raise ConlluError(f"multiple roots at {[t.index for t in roots]}", sentence_index)
    for t in tokens:
        if t.head < 0 or t.head > n:
            raise ConlluError(f"head {t.head} of token {t.index} out of range", sentence_index)
    # cycle check: every token must reach the root
    for t in tokens:
        seen = set()
        cur = t.index
        while cur != 0:
            if cur in seen:
                raise ConlluError(f"cycle through token {cur}", sentence_index)
            seen.add(cur)
            cur = tokens[cur - 1].head


def parse_conllu(data: bytes | str) -> list[DepSentence]:
    """Read CoNLL-U sentences, consuming only ID, FORM, HEAD and DEPREL.

    Multiword-token ranges (``1-2``) and empty nodes (``1.1``) are skipped;
    comment lines start with ``#``; blank lines separate sentences.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    sentences: list[DepSentence] = []
    tokens: list[DepToken] = []

    def flush():
        if tokens:
            expected = list(range(1, len(tokens) + 1))
            if [t.index for t in tokens] != expected:
                raise ConlluError("token ids are not 1..n", len(sentences))
            _validate_tree(tokens, len(sentences))
            sentences.append(DepSentence(tuple(tokens)))
            tokens.clear()

    for raw in data.split("\n"):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(
                f"expected 10 tab-separated columns, got {len(cols)}", len(sentences)
            )
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue
        try:
            index = int(tok_id)
        except ValueError:
            raise ConlluError(f"bad token id {tok_id!r}", len(sentences)) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluError(f"bad head {cols[6]!r} for token {index}", len(sentences)) from None
        tokens.append(DepToken(index, cols[1], head, cols[7]))
    flush()
    return sentences


def relinearize_sentence(s: DepSentence, pattern: OrderPattern) -> tuple[DepToken, ...]:
    """Greedy top-down re-linearization; token multiset always preserved.

    At a head with subject or object dependents, the subject subtrees, the
    head with its remaining dependents, and the object subtrees are emitted
    as blocks in the pattern's order. Heads without such dependents keep
    their original dependent order. Childless sentence-final punctuation
    hanging off the root is pinned to the end.
    """
    pattern = OrderPattern(pattern)
    tokens = s.tokens
    children: dict[int, list[int]] = {i: [] for i in range(len(tokens) + 1)}
    for t in tokens:
        children[t.head].append(t.index)

    root = s.root_index()
    pinned: list[int] = []
    last = len(tokens)
    while (
        last >= 1
        and last != root
        and tokens[last - 1].deprel.lower() == "punct"
        and tokens[last - 1].head == root
        and not children[last]
    ):
        pinned.append(last)
        last -= 1
    pinned.reverse()
    children[root] = [c for c in children[root] if c not in pinned]

    def arrange(idx: int) -> list[int]:
        kids = children[idx]
        subj = [k for k in kids if tokens[k - 1].deprel.lower() in SUBJECT_RELS]
        obj = [k for k in kids if tokens[k - 1].deprel.lower() in OBJECT_RELS]
        if not subj and not obj:
            out: list[int] = []
            for item in sorted(kids + [idx]):
                out.extend(arrange(item) if item != idx else [idx])
            return out
        rest = [k for k in kids if k not in subj and k not in obj]
        slots = {"s": [], "v": [], "o": []}
        for k in subj:
            slots["s"].extend(arrange(k))
        for k in obj:
            slots["o"].extend(arrange(k))
        for item in sorted(rest + [idx]):
            slots["v"].extend(arrange(item) if item != idx else [idx])
        out = []
        for symbol in pattern.value:
            out.extend(slots[symbol])
        return out

    order = arrange(root) + pinned
    return tuple(tokens[i - 1] for i in order)


def _consume_alignment(sentences, cursor: int, text: str, what: str):
    """Match parse sentences against ``text``; forms separated by whitespace only."""
    pos = 0
    n = len(text)
    consumed = []

    def skip_ws(p):
        while p < n and text[p].isspace():
            p += 1
        return p

    pos = skip_ws(pos)
    while pos < n:
        if cursor >= len(sentences):
            raise AlignmentError(f"ran out of parses aligning {what}: ...{text[pos:pos + 40]!r}")
        sent = sentences[cursor]
        for tok in sent.tokens:
            pos = skip_ws(pos)
            if not text.startswith(tok.form, pos):
                raise AlignmentError(
                    f"parse/{what} mismatch at offset {pos}: expected form {tok.form!r}, "
                    f"text reads {text[pos:pos + 20]!r}"
                )
            pos += len(tok.form)
        consumed.append(sent)
        cursor += 1
        pos = skip_ws(pos)
    return consumed, cursor


def _rebuild(sentences, pattern: OrderPattern) -> str:
    return " ".join(
        " ".join(tok.form for tok in relinearize_sentence(s, pattern)) for s in sentences
    )


def reorder_dataset(
    d: RcDataset,
    parses: list[DepSentence],
    pattern: OrderPattern,
    policy: RecoveryPolicy,
    extra_tag_params: dict | None = None,
) -> tuple[RcDataset, dict]:
    """Rebuild contexts and questions in the target order; re-locate answers.

    The parse stream must follow dataset order: for each paragraph, the
    context's sentences, then each question's sentences. Rebuilt text joins
    tokens with single spaces, so answers are always re-located fuzzily and
    the drop/noise policy applies to examples whose spans did not survive.
    """
    pattern = OrderPattern(pattern)
    counts = {
        "total": 0,
        "recovered": 0,
        "exact": 0,
        "dropped": 0,
        "noise": 0,
        "sentences": 0,
    }
    params = {"pattern": pattern.value, "mode": policy.mode, "cap": policy.cap}
    if extra_tag_params:
        params.update(extra_tag_params)
    cursor = 0
    articles = []
    for article in d.articles:
        paragraphs = []
        for paragraph in article.paragraphs:
            ctx_sents, cursor = _consume_alignment(
                parses, cursor, paragraph.context, "context"
            )
            counts["sentences"] += len(ctx_sents)
            new_context = _rebuild(ctx_sents, pattern)
            qas = []
            for qa in paragraph.qas:
                counts["total"] += 1
                q_sents, cursor = _consume_alignment(parses, cursor, qa.question, "question")
                counts["sentences"] += len(q_sents)
                new_question = _rebuild(q_sents, pattern)
                recovered: list[Answer] = []
                best_fallback: Answer | None = None
                any_within = False
                distances = []
                for ans in qa.answers:
                    query = " ".join(ans.text.split())
                    if not query or not new_context:
                        continue
                    hint = 0
                    if paragraph.context:
                        hint = round(
                            ans.answer_start / len(paragraph.context) * len(new_context)
                        )
                    match = best_span_search(new_context, query, hint)
                    distances.append(match.distance)
                    if match.distance <= policy.threshold(len(query)):
                        any_within = True
                        recovered.append(Answer(match.matched_text, match.start))
                    elif best_fallback is None:
                        best_fallback = Answer(match.matched_text, match.start)
                tag = TransformTag("reorder", dict(params))
                if any_within:
                    counts["recovered"] += 1
                    if distances and min(distances) == 0:
                        counts["exact"] += 1
                    qas.append(
                        QaEntry(qa.id, new_question, tuple(recovered),
                                qa.lineage + (tag,), qa.noise_flag)
                    )
                elif policy.mode == "train":
                    counts["dropped"] += 1
                else:
                    counts["noise"] += 1
                    answers = (best_fallback,) if best_fallback is not None else ()
                    qas.append(
                        QaEntry(qa.id, new_question, answers, qa.lineage + (tag,), True)
                    )
            paragraphs.append(Paragraph(new_context, tuple(qas)))
        articles.append(Article(article.title, tuple(paragraphs)))
    if cursor != len(parses):
        raise AlignmentError(
            f"{len(parses) - cursor} unconsumed parse sentences after the last text"
        )
    return RcDataset(d.version, tuple(articles)), counts
