"""Content-level operations shared by the HTTP service and the manifest runner.

Every function here maps raw document contents plus scalar parameters to
output contents plus a JSON-able report, so the callers only move bytes.
"""

from __future__ import annotations

import json

import numpy as np

from . import analysis, codeswitch, corpus, metrics, permute, recovery, reorder, tsv
from .errors import DatasetParseError
from .tokens import TokenizerPolicy


def _policy(mode: str, cap: int) -> recovery.RecoveryPolicy:
    return recovery.RecoveryPolicy(cap=int(cap), mode=mode)


def op_recover(
    dataset: bytes,
    triples_text: str,
    mode: str = "train",
    cap: int = 10,
    extra_tag_params: dict | None = None,
) -> tuple[bytes, dict]:
    d = corpus.parse_dataset(dataset)
    triples = recovery.parse_triples(triples_text)
    out, counts = recovery.recover_dataset(d, triples, _policy(mode, cap), extra_tag_params)
    corpus.validate_dataset(out)
    return corpus.serialize_dataset(out), counts


def op_permute(
    dataset: bytes,
    seed: int | None,
    policy: str = "mixed",
    derangement: bool = True,
    table_text: str | None = None,
    extra_tag_params: dict | None = None,
) -> tuple[bytes, str, dict]:
    d = corpus.parse_dataset(dataset)
    pol = TokenizerPolicy(policy)
    if table_text is not None:
        table = permute.parse_table(table_text, pol, seed, derangement)
    else:
        vocab = permute.build_vocab(d, pol)
        table = permute.build_permutation(vocab, seed, derangement, pol)
    out = permute.apply_permutation(d, table, extra_tag_params)
    corpus.validate_dataset(out)
    report = {
        "vocab_size": len(table.vocabulary),
        "fixed_points": len(table.fixed_points()),
        "seed": table.seed,
        "policy": pol.value,
        "derangement": table.derangement_required,
    }
    return corpus.serialize_dataset(out), permute.format_table(table), report


def op_codeswitch(
    dataset: bytes,
    dictionary_text: str,
    scope: str = "both",
    choice: str = "first",
    seed: int | None = None,
    policy: str = "mixed",
    source_lang: str = "src",
    target_lang: str = "tgt",
    extra_tag_params: dict | None = None,
) -> tuple[bytes, dict]:
    d = corpus.parse_dataset(dataset)
    lexicon = codeswitch.load_dictionary(dictionary_text, source_lang, target_lang)
    out, report = codeswitch.codeswitch_dataset(
        d, lexicon, scope, choice, seed, TokenizerPolicy(policy), extra_tag_params
    )
    corpus.validate_dataset(out)
    return corpus.serialize_dataset(out), {
        "total_word_tokens": report.total_word_tokens,
        "substituted_tokens": report.substituted_tokens,
        "ratio": report.ratio,
        "dictionary_entries": len(lexicon),
        "scope": scope,
        "choice": choice,
    }


def op_reorder(
    dataset: bytes,
    conllu_text: str,
    pattern: str,
    mode: str = "train",
    cap: int = 10,
    extra_tag_params: dict | None = None,
) -> tuple[bytes, dict]:
    d = corpus.parse_dataset(dataset)
    parses = reorder.parse_conllu(conllu_text)
    out, counts = reorder.reorder_dataset(
        d, parses, reorder.OrderPattern(pattern), _policy(mode, cap), extra_tag_params
    )
    corpus.validate_dataset(out)
    return corpus.serialize_dataset(out), counts


def op_downsample(
    dataset: bytes,
    target: int,
    seed: int,
    tag_params: dict | None = None,
) -> tuple[bytes, dict]:
    d = corpus.parse_dataset(dataset)
    out = corpus.downsample(d, target, seed)
    if tag_params is not None:
        tag = corpus.TransformTag("downsample", dict(tag_params, target=target, seed=seed))
        out = corpus.map_qas(out, lambda qa: qa.with_tag(tag))
    return corpus.serialize_dataset(out), {
        "input_qas": d.qa_count(),
        "kept_qas": out.qa_count(),
        "seed": seed,
    }


def op_eval(dataset: bytes, predictions_text: str, lang: str = "mixed") -> dict:
    d = corpus.parse_dataset(dataset)
    try:
        predictions = json.loads(predictions_text)
    except json.JSONDecodeError as exc:
        raise DatasetParseError(f"invalid predictions JSON: {exc.msg}") from exc
    if not isinstance(predictions, dict):
        raise DatasetParseError("predictions must be an object mapping id to answer")
    lang = {"english-like": "english"}.get(lang, lang)
    return metrics.evaluate(predictions, d, lang).to_json()


def _fmt(value: float) -> str:
    return repr(float(value))


def _load_repr(data: bytes, meta_text: str | None) -> analysis.ReprMatrix:
    return analysis.load_representations(data, meta_text)


def _parse_pairing(text: str) -> dict[str, str]:
    pairing = {}
    for line in text.split("\n"):
        if not line or line.startswith("#"):
            continue
        fields = tsv.parse_row(line)
        if len(fields) != 2:
            raise ValueError(f"pairing rows need 2 columns, got {len(fields)}")
        pairing[fields[0]] = fields[1]
    return pairing


def op_analyze(
    action: str,
    x: bytes,
    x_meta: str | None = None,
    y: bytes | None = None,
    y_meta: str | None = None,
    pairing_text: str | None = None,
    components: int = 2,
    variance_fraction: float = 0.99,
    epsilon: float = 1e-10,
) -> tuple[str, dict]:
    """Dispatch one analysis action; returns (table TSV, summary report)."""
    xm = _load_repr(x, x_meta)
    if action == "info":
        langs: dict[str, int] = {}
        for m in xm.meta:
            langs[m.language] = langs.get(m.language, 0) + 1
        report = {
            "n": xm.n,
            "d": xm.d,
            "answer_rows": sum(1 for m in xm.meta if m.in_answer_span),
            "examples": len({m.example_id for m in xm.meta}),
            "languages": dict(sorted(langs.items())),
        }
        return "", report
    if action == "pca":
        result = analysis.pca_project(xm, components)
        header = list(analysis._META_COLUMNS) + [
            f"pc{j + 1}" for j in range(result.components)
        ]
        lines = ["\t".join(header)]
        for i, m in enumerate(xm.meta):
            row = [str(i), m.example_id, str(m.token_index), m.token_text,
                   "1" if m.in_answer_span else "0", m.language]
            row += [_fmt(v) for v in result.coordinates[i]]
            lines.append(tsv.format_row(row))
        report = {
            "components": result.components,
            "explained_variance_ratio": [float(v) for v in result.explained_variance_ratio],
        }
        return "\n".join(lines) + "\n", report
    if y is None:
        raise ValueError(f"action {action!r} needs a second matrix")
    ym = _load_repr(y, y_meta)
    if action == "cosine":
        pairing = _parse_pairing(pairing_text) if pairing_text else None
        result = analysis.answer_span_cosine(xm, ym, pairing)
        lines = ["x_id\ty_id\tcosine"]
        lines += [f"{p.x_id}\t{p.y_id}\t{_fmt(p.value)}" for p in result.pairs]
        report = {
            "mean": result.mean,
            "pairs": len(result.pairs),
            "skipped": list(result.skipped),
        }
        return "\n".join(lines) + "\n", report
    if action == "svcca":
        cfg = analysis.SvccaConfig(variance_fraction, epsilon)
        result = analysis.svcca(xm, ym, cfg)
        lines = ["index\tcorrelation"]
        lines += [f"{i}\t{_fmt(r)}" for i, r in enumerate(result.correlations)]
        report = {
            "mean_correlation": result.mean_correlation,
            "kept_x": result.kept_dims[0],
            "kept_y": result.kept_dims[1],
            "correlations": list(result.correlations),
        }
        return "\n".join(lines) + "\n", report
    if action == "procrustes":
        result = analysis.procrustes_align(xm.values, ym.values)
        w = result.map.matrix
        lines = ["\t".join(_fmt(v) for v in row) for row in w]
        ortho_err = float(np.abs(w.T @ w - np.eye(w.shape[1])).max())
        report = {
            "residual": result.residual,
            "orthogonality_error": ortho_err,
            "d": int(w.shape[0]),
        }
        return "\n".join(lines) + "\n", report
    raise ValueError(f"unknown analyze action {action!r}")
