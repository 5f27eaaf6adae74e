"""Multilingual EM/F1 scoring plus the one-way ANOVA used for factor analysis.

Normalization follows the usual extractive-QA convention, extended for CJK
text: ideographs and kana are scored one code point at a time, while
space-delimited words (including Hangul) stay whole. Articles are stripped
only for classes that can contain English.
"""

from __future__ import annotations

import math
import re
import string
import unicodedata
from collections import Counter
from dataclasses import dataclass

from .corpus import RcDataset
from .tokens import is_cjk_char

LANG_CLASSES = ("english", "cjk", "mixed")

_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")
_ASCII_PUNCT = set(string.punctuation)


def _strip_punct(text: str) -> str:
    return "".join(
        ch
        for ch in text
        if ch not in _ASCII_PUNCT and not unicodedata.category(ch).startswith("P")
    )


def normalize_answer(text: str, lang_class: str = "mixed") -> str:
    """Lowercase, drop punctuation, handle articles and CJK spacing, trim."""
    if lang_class not in LANG_CLASSES:
        raise ValueError(f"lang_class must be one of {LANG_CLASSES}, got {lang_class!r}")
    out = _strip_punct(text.lower())
    if lang_class in ("english", "mixed"):
        out = _ARTICLE_RE.sub(" ", out)
    if lang_class in ("cjk", "mixed"):
        out = "".join(f" {ch} " if is_cjk_char(ch) else ch for ch in out)
    return " ".join(out.split())


def token_f1(prediction: str, gold: str, lang_class: str = "mixed") -> float:
    """Bag-of-tokens F1 with multiplicity over normalized tokens."""
    pred_tokens = normalize_answer(prediction, lang_class).split()
    gold_tokens = normalize_answer(gold, lang_class).split()
    if not pred_tokens or not gold_tokens:
        return float(pred_tokens == gold_tokens)
    common = Counter(pred_tokens) & Counter(gold_tokens)
    overlap = sum(common.values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def exact_match(prediction: str, gold: str, lang_class: str = "mixed") -> bool:
    return normalize_answer(prediction, lang_class) == normalize_answer(gold, lang_class)


@dataclass(frozen=True)
class ExampleScore:
    id: str
    em: float
    f1: float
    noise: bool


@dataclass(frozen=True)
class MetricReport:
    em: float  # percentages over all examples
    f1: float
    evaluated: int
    noise_count: int
    per_example: tuple[ExampleScore, ...]
    missing: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "em": self.em,
            "f1": self.f1,
            "evaluated": self.evaluated,
            "noise_count": self.noise_count,
            "missing": list(self.missing),
            "per_example": [
                {"id": s.id, "em": s.em, "f1": s.f1, "noise": s.noise}
                for s in self.per_example
            ],
        }


def evaluate(predictions: dict, d: RcDataset, lang_class: str = "mixed") -> MetricReport:
    """Score every example: EM/F1 maxed over golds, means over ALL examples.

    Noise-flagged examples stay in the denominator with their best-effort
    golds; an example with no gold at all scores zero. Missing predictions
    score zero and are listed.
    """
    scores = []
    missing = []
    noise_count = 0
    for _, _, qa in d.iter_qas():
        if qa.noise_flag:
            noise_count += 1
        if qa.id not in predictions:
            missing.append(qa.id)
            scores.append(ExampleScore(qa.id, 0.0, 0.0, qa.noise_flag))
            continue
        pred = str(predictions[qa.id])
        em = 0.0
        f1 = 0.0
        for ans in qa.answers:
            em = max(em, float(exact_match(pred, ans.text, lang_class)))
            f1 = max(f1, token_f1(pred, ans.text, lang_class))
        scores.append(ExampleScore(qa.id, em, f1, qa.noise_flag))
    total = len(scores)
    em_mean = 100.0 * sum(s.em for s in scores) / total if total else 0.0
    f1_mean = 100.0 * sum(s.f1 for s in scores) / total if total else 0.0
    return MetricReport(em_mean, f1_mean, total, noise_count, tuple(scores), tuple(missing))


@dataclass(frozen=True)
class AnovaResult:
    f_statistic: float  # may be inf (no within variance) or nan (no variance at all)
    df_between: int
    df_within: int
    group_means: tuple[float, ...]

    def to_json(self) -> dict:
        if math.isnan(self.f_statistic):
            f: float | str = "undefined"
        elif math.isinf(self.f_statistic):
            f = "infinite"
        else:
            f = self.f_statistic
        return {
            "f_statistic": f,
            "df_between": self.df_between,
            "df_within": self.df_within,
            "group_means": list(self.group_means),
        }


def anova_oneway(groups: list[list[float]]) -> AnovaResult:
    """Classic one-way F statistic from definitional sums of squares."""
    k = len(groups)
    if k < 2:
        raise ValueError("need at least 2 groups")
    if any(len(g) < 1 for g in groups):
        raise ValueError("every group needs at least one observation")
    n_total = sum(len(g) for g in groups)
    if n_total <= k:
        raise ValueError("need more observations than groups")
    grand = sum(x for g in groups for x in g) / n_total
    means = [sum(g) / len(g) for g in groups]
    ss_between = sum(len(g) * (m - grand) ** 2 for g, m in zip(groups, means))
    ss_within = sum((x - m) ** 2 for g, m in zip(groups, means) for x in g)
    df_between = k - 1
    df_within = n_total - k
    if ss_within == 0.0:
        f = float("nan") if ss_between == 0.0 else float("inf")
    else:
        f = (ss_between / df_between) / (ss_within / df_within)
    return AnovaResult(f, df_between, df_within, tuple(means))
