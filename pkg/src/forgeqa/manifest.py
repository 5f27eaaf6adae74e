"""Manifest-driven pipeline orchestration with reproducibility stamps.

A manifest is a JSON document listing steps in execution order; each step
names a kind, parameters, input paths and output paths. Validation runs in
full before anything executes. Dataset outputs carry per-qa lineage tags
that include the digests of the step's inputs, and the run report records a
digest for every file written, so reruns are comparable byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from . import __version__, ops
from .errors import ForgeError, ManifestError

STEP_KINDS = ("recover", "permute", "codeswitch", "reorder", "downsample", "eval", "analyze")


@dataclass(frozen=True)
class Step:
    kind: str
    params: Mapping[str, Any]
    inputs: Mapping[str, str]
    outputs: Mapping[str, str]


@dataclass(frozen=True)
class Manifest:
    steps: tuple[Step, ...]
    seed: int | None = None
    version: str | None = None


def _require_str_map(obj: Any, what: str) -> dict[str, str]:
    if not isinstance(obj, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in obj.items()
    ):
        raise ManifestError(f"{what} must map names to path strings")
    return obj


def load_manifest(data: bytes | str) -> Manifest:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    return manifest_from_json(doc)


def manifest_from_json(doc: Any) -> Manifest:
    if not isinstance(doc, dict):
        raise ManifestError("manifest must be a JSON object")
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ManifestError("seed must be an integer")
    version = doc.get("version")
    steps_doc = doc.get("steps")
    if not isinstance(steps_doc, list) or not steps_doc:
        raise ManifestError("manifest needs a non-empty steps array")
    steps = []
    for i, s in enumerate(steps_doc):
        if not isinstance(s, dict):
            raise ManifestError(f"step {i} must be an object")
        kind = s.get("kind")
        if kind not in STEP_KINDS:
            raise ManifestError(f"step {i}: unknown kind {kind!r}")
        params = s.get("params", {})
        if not isinstance(params, dict):
            raise ManifestError(f"step {i}: params must be an object")
        inputs = _require_str_map(s.get("inputs", {}), f"step {i} inputs")
        outputs = _require_str_map(s.get("outputs", {}), f"step {i} outputs")
        steps.append(Step(kind, params, inputs, outputs))
    return Manifest(tuple(steps), seed, version if version is None else str(version))


def _choice(*allowed):
    def check(v):
        if v not in allowed:
            raise ValueError(f"must be one of {allowed}, got {v!r}")
        return v

    return check


def _int(v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"must be an integer, got {v!r}")
    return v


def _number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"must be a number, got {v!r}")
    return float(v)


def _bool(v):
    if not isinstance(v, bool):
        raise ValueError(f"must be a boolean, got {v!r}")
    return v


def _str(v):
    if not isinstance(v, str):
        raise ValueError(f"must be a string, got {v!r}")
    return v


@dataclass(frozen=True)
class _StepSpec:
    required_inputs: frozenset
    required_outputs: frozenset
    optional_inputs: frozenset = frozenset()
    optional_outputs: frozenset = frozenset()
    params: Mapping[str, Callable] = field(default_factory=dict)
    required_params: frozenset = frozenset()


_SPECS: dict[str, _StepSpec] = {
    "recover": _StepSpec(
        frozenset({"dataset", "triples"}),
        frozenset({"dataset"}),
        optional_outputs=frozenset({"report"}),
        params={"mode": _choice("train", "test"), "cap": _int},
    ),
    "permute": _StepSpec(
        frozenset({"dataset"}),
        frozenset({"dataset"}),
        optional_inputs=frozenset({"table"}),
        optional_outputs=frozenset({"table", "report"}),
        params={
            "seed": _int,
            "policy": _choice("space", "cjk", "mixed"),
            "derangement": _bool,
        },
    ),
    "codeswitch": _StepSpec(
        frozenset({"dataset", "dictionary"}),
        frozenset({"dataset"}),
        optional_outputs=frozenset({"report"}),
        params={
            "scope": _choice("context", "question", "both"),
            "choice": _choice("first", "seeded"),
            "seed": _int,
            "policy": _choice("space", "cjk", "mixed"),
            "source_lang": _str,
            "target_lang": _str,
        },
    ),
    "reorder": _StepSpec(
        frozenset({"dataset", "parses"}),
        frozenset({"dataset"}),
        optional_outputs=frozenset({"report"}),
        params={
            "pattern": _choice("svo", "sov", "vos", "vso", "osv", "ovs"),
            "mode": _choice("train", "test"),
            "cap": _int,
        },
        required_params=frozenset({"pattern"}),
    ),
    "downsample": _StepSpec(
        frozenset({"dataset"}),
        frozenset({"dataset"}),
        optional_outputs=frozenset({"report"}),
        params={"target": _int, "seed": _int},
        required_params=frozenset({"target"}),
    ),
    "eval": _StepSpec(
        frozenset({"dataset", "predictions"}),
        frozenset({"report"}),
        params={"lang": _choice("english", "english-like", "cjk", "mixed")},
    ),
    "analyze": _StepSpec(
        frozenset({"x"}),
        frozenset(),
        optional_inputs=frozenset({"x_meta", "y", "y_meta", "pairing"}),
        optional_outputs=frozenset({"table", "report"}),
        params={
            "action": _choice("cosine", "pca", "svcca", "procrustes", "info"),
            "components": _int,
            "variance_fraction": _number,
            "epsilon": _number,
        },
        required_params=frozenset({"action"}),
    ),
}


def validate_manifest(m: Manifest, base_dir: str | Path) -> None:
    """Check kinds, params, and input availability; raises before any work."""
    base = Path(base_dir)
    produced: set[Path] = set()
    problems: list[str] = []
    for i, step in enumerate(m.steps):
        spec = _SPECS[step.kind]
        for name in spec.required_inputs - set(step.inputs):
            problems.append(f"step {i} ({step.kind}): missing input '{name}'")
        for name in set(step.inputs) - spec.required_inputs - spec.optional_inputs:
            problems.append(f"step {i} ({step.kind}): unexpected input '{name}'")
        for name in spec.required_outputs - set(step.outputs):
            problems.append(f"step {i} ({step.kind}): missing output '{name}'")
        for name in set(step.outputs) - spec.required_outputs - spec.optional_outputs:
            problems.append(f"step {i} ({step.kind}): unexpected output '{name}'")
        for name in spec.required_params - set(step.params):
            problems.append(f"step {i} ({step.kind}): missing param '{name}'")
        for name, value in step.params.items():
            checker = spec.params.get(name)
            if checker is None:
                problems.append(f"step {i} ({step.kind}): unknown param '{name}'")
                continue
            try:
                checker(value)
            except ValueError as exc:
                problems.append(f"step {i} ({step.kind}): param '{name}' {exc}")
        if step.kind == "downsample" and "seed" not in step.params and m.seed is None:
            problems.append(
                f"step {i} (downsample): needs a seed (step param or manifest seed)"
            )
        for name, rel in step.inputs.items():
            path = (base / rel).resolve()
            if path not in produced and not path.exists():
                problems.append(
                    f"step {i} ({step.kind}): input '{name}' not found: {rel}"
                )
        for rel in step.outputs.values():
            produced.add((base / rel).resolve())
    if problems:
        raise ManifestError("; ".join(problems))


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _execute_step(step: Step, inputs: dict[str, bytes], seed_default: int | None):
    """Run one step over loaded input bytes; returns (outputs bytes, counts)."""
    p = dict(step.params)
    seed = p.get("seed", seed_default)
    tag = {"inputs": {name: _digest(data) for name, data in sorted(inputs.items())}}
    text = lambda name: inputs[name].decode("utf-8")  # noqa: E731
    outputs: dict[str, bytes] = {}
    if step.kind == "recover":
        data, counts = ops.op_recover(
            inputs["dataset"], text("triples"), p.get("mode", "train"),
            p.get("cap", 10), tag,
        )
        outputs["dataset"] = data
    elif step.kind == "permute":
        data, table, counts = ops.op_permute(
            inputs["dataset"], seed, p.get("policy", "mixed"),
            p.get("derangement", True),
            text("table") if "table" in inputs else None, tag,
        )
        outputs["dataset"] = data
        if "table" in step.outputs:
            outputs["table"] = table.encode("utf-8")
    elif step.kind == "codeswitch":
        data, counts = ops.op_codeswitch(
            inputs["dataset"], text("dictionary"), p.get("scope", "both"),
            p.get("choice", "first"), seed, p.get("policy", "mixed"),
            p.get("source_lang", "src"), p.get("target_lang", "tgt"), tag,
        )
        outputs["dataset"] = data
    elif step.kind == "reorder":
        data, counts = ops.op_reorder(
            inputs["dataset"], text("parses"), p["pattern"],
            p.get("mode", "train"), p.get("cap", 10), tag,
        )
        outputs["dataset"] = data
    elif step.kind == "downsample":
        data, counts = ops.op_downsample(inputs["dataset"], p["target"], seed, tag)
        outputs["dataset"] = data
    elif step.kind == "eval":
        counts = ops.op_eval(inputs["dataset"], text("predictions"), p.get("lang", "mixed"))
    elif step.kind == "analyze":
        table, counts = ops.op_analyze(
            p["action"],
            inputs["x"],
            text("x_meta") if "x_meta" in inputs else None,
            inputs.get("y"),
            text("y_meta") if "y_meta" in inputs else None,
            text("pairing") if "pairing" in inputs else None,
            p.get("components", 2),
            p.get("variance_fraction", 0.99),
            p.get("epsilon", 1e-10),
        )
        if "table" in step.outputs:
            outputs["table"] = table.encode("utf-8")
    else:  # pragma: no cover - guarded by validation
        raise ManifestError(f"unknown kind {step.kind!r}")
    if "report" in step.outputs:
        outputs["report"] = (
            json.dumps(counts, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
        ).encode("utf-8")
    return outputs, counts


def run_manifest(m: Manifest, base_dir: str | Path) -> dict:
    """Validate, then execute steps in order, writing outputs under base_dir.

    A failing step stops the run; outputs of earlier steps stay on disk and
    the report names the failure point. The report carries a digest of every
    file written and never embeds wall-clock state, so a rerun over identical
    inputs is byte-identical.
    """
    base = Path(base_dir)
    validate_manifest(m, base)
    report: dict[str, Any] = {
        "toolkit_version": __version__,
        "manifest_version": m.version,
        "seed": m.seed,
        "status": "ok",
        "failed_step": None,
        "error": None,
        "steps": [],
    }
    for i, step in enumerate(m.steps):
        entry: dict[str, Any] = {"index": i, "kind": step.kind, "status": "ok"}
        try:
            inputs = {
                name: (base / rel).resolve().read_bytes()
                for name, rel in step.inputs.items()
            }
            outputs, counts = _execute_step(step, inputs, m.seed)
            written = {}
            for name, rel in step.outputs.items():
                if name not in outputs:
                    continue
                path = (base / rel).resolve()
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(outputs[name])
                written[name] = {
                    "path": rel,
                    "sha256": _digest(outputs[name]),
                    "bytes": len(outputs[name]),
                }
            entry["counts"] = counts
            entry["outputs"] = written
            report["steps"].append(entry)
        except (ForgeError, ValueError, OSError) as exc:
            entry["status"] = "failed"
            entry["error"] = {"type": type(exc).__name__, "message": str(exc)}
            report["steps"].append(entry)
            report["status"] = "failed"
            report["failed_step"] = i
            report["error"] = entry["error"]
            break
    return report
