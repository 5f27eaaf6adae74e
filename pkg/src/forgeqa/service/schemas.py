"""Pydantic request/response models for the HTTP service.

Documents travel inline: datasets and predictions as JSON strings,
dictionaries/parses/triples/tables as text, representation matrices as
base64. Responses echo serialized documents as strings so clients write
them to disk untouched, keeping outputs byte-stable.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    type: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody


class HealthResponse(BaseModel):
    status: str
    version: str


class RecoverRequest(BaseModel):
    dataset_json: str
    triples_tsv: str
    mode: Literal["train", "test"] = "train"
    cap: int = 10


class DatasetResponse(BaseModel):
    dataset_json: str
    report: dict[str, Any]


class PermuteRequest(BaseModel):
    dataset_json: str
    seed: int | None = None
    policy: Literal["space", "cjk", "mixed"] = "mixed"
    derangement: bool = True
    table_tsv: str | None = None


class PermuteResponse(BaseModel):
    dataset_json: str
    table_tsv: str
    report: dict[str, Any]


class CodeSwitchRequest(BaseModel):
    dataset_json: str
    dictionary_text: str
    scope: Literal["context", "question", "both"] = "both"
    choice: Literal["first", "seeded"] = "first"
    seed: int | None = None
    policy: Literal["space", "cjk", "mixed"] = "mixed"
    source_lang: str = "src"
    target_lang: str = "tgt"


class ReorderRequest(BaseModel):
    dataset_json: str
    conllu_text: str
    pattern: Literal["svo", "sov", "vos", "vso", "osv", "ovs"]
    mode: Literal["train", "test"] = "train"
    cap: int = 10


class DownsampleRequest(BaseModel):
    dataset_json: str
    target: int = Field(ge=0)
    seed: int


class EvalRequest(BaseModel):
    dataset_json: str
    predictions_json: str
    lang: Literal["english", "english-like", "cjk", "mixed"] = "mixed"


class ReportResponse(BaseModel):
    report: dict[str, Any]


class AnovaRequest(BaseModel):
    groups: list[list[float]]


class AnalyzeRequest(BaseModel):
    action: Literal["cosine", "pca", "svcca", "procrustes", "info"]
    x_repm_b64: str
    x_meta_tsv: str | None = None
    y_repm_b64: str | None = None
    y_meta_tsv: str | None = None
    pairing_tsv: str | None = None
    components: int = 2
    variance_fraction: float = 0.99
    epsilon: float = 1e-10


class AnalyzeResponse(BaseModel):
    table_tsv: str
    report: dict[str, Any]


class RunRequest(BaseModel):
    manifest: dict[str, Any]
    base_dir: str  # resolved on the service host; the default client is in-process


class RunResponse(BaseModel):
    report: dict[str, Any]
