"""SQuAD-format dataset model: parsing, validation, serialization, down-sampling.

Offsets are Unicode code points throughout (Python string indices), matching
the convention of the source corpora. Transform provenance and the noise
flag ride in an ``xforge`` extension object per qa entry, which standard
consumers ignore.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from typing import Any, Iterator, Mapping

from .errors import DatasetIntegrityError, DatasetParseError


@dataclass(frozen=True)
class TransformTag:
    """One applied transform: kind plus whatever parameters identify the run."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "TransformTag":
        return cls(kind=str(obj.get("kind", "")), params=dict(obj.get("params", {})))


@dataclass(frozen=True)
class Answer:
    text: str
    answer_start: int


@dataclass(frozen=True)
class QaEntry:
    id: str
    question: str
    answers: tuple[Answer, ...]
    lineage: tuple[TransformTag, ...] = ()
    noise_flag: bool = False

    def with_tag(self, tag: TransformTag) -> "QaEntry":
        return replace(self, lineage=self.lineage + (tag,))


@dataclass(frozen=True)
class Paragraph:
    context: str
    qas: tuple[QaEntry, ...]


@dataclass(frozen=True)
class Article:
    title: str
    paragraphs: tuple[Paragraph, ...]


@dataclass(frozen=True)
class RcDataset:
    version: str
    articles: tuple[Article, ...]

    def iter_qas(self) -> Iterator[tuple[Article, Paragraph, QaEntry]]:
        for article in self.articles:
            for paragraph in article.paragraphs:
                for qa in paragraph.qas:
                    yield article, paragraph, qa

    def qa_count(self) -> int:
        return sum(1 for _ in self.iter_qas())


def _expect(obj: Any, typ: type, path: str, what: str) -> Any:
    if not isinstance(obj, typ):
        raise DatasetParseError(f"expected {what}, got {type(obj).__name__}", path)
    return obj


def _parse_qa(obj: Any, path: str) -> QaEntry:
    _expect(obj, dict, path, "object")
    qa_id = _expect(obj.get("id"), str, f"{path}.id", "string")
    question = _expect(obj.get("question"), str, f"{path}.question", "string")
    answers = []
    for k, ans in enumerate(_expect(obj.get("answers"), list, f"{path}.answers", "array")):
        apath = f"{path}.answers[{k}]"
        _expect(ans, dict, apath, "object")
        text = _expect(ans.get("text"), str, f"{apath}.text", "string")
        start = ans.get("answer_start")
        if isinstance(start, bool) or not isinstance(start, int):
            raise DatasetParseError("expected integer", f"{apath}.answer_start")
        answers.append(Answer(text, start))
    lineage: tuple[TransformTag, ...] = ()
    noise = False
    ext = obj.get("xforge")
    if ext is not None:
        _expect(ext, dict, f"{path}.xforge", "object")
        lineage = tuple(
            TransformTag.from_json(_expect(t, dict, f"{path}.xforge.lineage", "object"))
            for t in ext.get("lineage", [])
        )
        noise = bool(ext.get("noise_flag", False))
    return QaEntry(qa_id, question, tuple(answers), lineage, noise)


def parse_dataset(data: bytes | str) -> RcDataset:
    """Parse a SQuAD v1.1 shaped JSON document and check both invariants."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DatasetParseError(f"not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise DatasetParseError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    _expect(doc, dict, "$", "object")
    version = str(doc.get("version", ""))
    articles = []
    for i, art in enumerate(_expect(doc.get("data"), list, "$.data", "array")):
        apath = f"$.data[{i}]"
        _expect(art, dict, apath, "object")
        title = str(art.get("title", ""))
        paragraphs = []
        for j, para in enumerate(
            _expect(art.get("paragraphs"), list, f"{apath}.paragraphs", "array")
        ):
            ppath = f"{apath}.paragraphs[{j}]"
            _expect(para, dict, ppath, "object")
            context = _expect(para.get("context"), str, f"{ppath}.context", "string")
            qas = tuple(
                _parse_qa(qa, f"{ppath}.qas[{k}]")
                for k, qa in enumerate(_expect(para.get("qas"), list, f"{ppath}.qas", "array"))
            )
            paragraphs.append(Paragraph(context, qas))
        articles.append(Article(title, tuple(paragraphs)))
    dataset = RcDataset(version, tuple(articles))
    validate_dataset(dataset)
    return dataset


def validate_dataset(d: RcDataset) -> None:
    """Enforce qa-id uniqueness and the answer/context substring invariant."""
    seen: set[str] = set()
    for _, paragraph, qa in d.iter_qas():
        if qa.id in seen:
            raise DatasetIntegrityError("duplicate qa id", qa.id)
        seen.add(qa.id)
        if not qa.answers and not qa.noise_flag:
            raise DatasetIntegrityError("no answers and noise flag unset", qa.id)
        for ans in qa.answers:
            end = ans.answer_start + len(ans.text)
            if ans.answer_start < 0 or end > len(paragraph.context) or (
                paragraph.context[ans.answer_start:end] != ans.text
            ):
                raise DatasetIntegrityError(
                    f"answer {ans.text!r} not at offset {ans.answer_start}", qa.id
                )


def _qa_to_json(qa: QaEntry) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "id": qa.id,
        "question": qa.question,
        "answers": [{"text": a.text, "answer_start": a.answer_start} for a in qa.answers],
    }
    if qa.lineage or qa.noise_flag:
        ext: dict[str, Any] = {"lineage": [t.to_json() for t in qa.lineage]}
        if qa.noise_flag:
            ext["noise_flag"] = True
        obj["xforge"] = ext
    return obj


def dataset_to_json(d: RcDataset) -> dict[str, Any]:
    return {
        "version": d.version,
        "data": [
            {
                "title": a.title,
                "paragraphs": [
                    {"context": p.context, "qas": [_qa_to_json(q) for q in p.qas]}
                    for p in a.paragraphs
                ],
            }
            for a in d.articles
        ],
    }


def serialize_dataset(d: RcDataset) -> bytes:
    """Canonical UTF-8 serialization; parse(serialize(d)) == d."""
    return json.dumps(dataset_to_json(d), ensure_ascii=False).encode("utf-8")


def strip_lineage(d: RcDataset) -> RcDataset:
    """Drop all transform tags (noise flags stay); used for provenance-free diffs."""
    return map_qas(d, lambda qa: replace(qa, lineage=()))


def map_qas(d: RcDataset, fn) -> RcDataset:
    """Rebuild the dataset applying ``fn`` to every qa entry in place."""
    return RcDataset(
        d.version,
        tuple(
            Article(
                a.title,
                tuple(
                    Paragraph(p.context, tuple(fn(q) for q in p.qas)) for p in a.paragraphs
                ),
            )
            for a in d.articles
        ),
    )


def downsample(d: RcDataset, target_qa_count: int, seed: int) -> RcDataset:
    """Uniform sample without replacement over qa entries, deterministic in seed.

    Paragraphs and articles left without qas are removed; input order of the
    survivors is preserved. ``target_qa_count`` equal to the dataset size is
    the identity.
    """
    total = d.qa_count()
    if target_qa_count < 0 or target_qa_count > total:
        raise ValueError(f"target {target_qa_count} outside [0, {total}]")
    keep = set(random.Random(seed).sample(range(total), target_qa_count))
    articles = []
    pos = 0
    for article in d.articles:
        paragraphs = []
        for paragraph in article.paragraphs:
            qas = []
            for qa in paragraph.qas:
                if pos in keep:
                    qas.append(qa)
                pos += 1
            # paragraphs that were empty to begin with are left untouched
            if qas or not paragraph.qas:
                paragraphs.append(Paragraph(paragraph.context, tuple(qas)))
        if paragraphs or not article.paragraphs:
            articles.append(Article(article.title, tuple(paragraphs)))
    return RcDataset(d.version, tuple(articles))
