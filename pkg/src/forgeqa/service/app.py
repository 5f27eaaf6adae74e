"""FastAPI service exposing every toolkit operation over HTTP."""

from __future__ import annotations

import base64
import binascii

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, manifest as manifest_mod, metrics, ops
from ..errors import ForgeError, ManifestError
from . import schemas


def _b64(data: str | None) -> bytes | None:
    if data is None:
        return None
    try:
        return base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ValueError(f"invalid base64 payload: {exc}") from exc


def create_app() -> FastAPI:
    app = FastAPI(title="forgeqa", version=__version__)

    @app.exception_handler(ForgeError)
    async def forge_error(request: Request, exc: ForgeError):
        return JSONResponse(
            status_code=422,
            content={"error": {"type": type(exc).__name__, "message": str(exc)}},
        )

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=422,
            content={"error": {"type": "ValueError", "message": str(exc)}},
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/recover", response_model=schemas.DatasetResponse)
    def recover(req: schemas.RecoverRequest):
        data, report = ops.op_recover(
            req.dataset_json.encode("utf-8"), req.triples_tsv, req.mode, req.cap
        )
        return schemas.DatasetResponse(dataset_json=data.decode("utf-8"), report=report)

    @app.post("/permute", response_model=schemas.PermuteResponse)
    def permute(req: schemas.PermuteRequest):
        data, table, report = ops.op_permute(
            req.dataset_json.encode("utf-8"),
            req.seed,
            req.policy,
            req.derangement,
            req.table_tsv,
        )
        return schemas.PermuteResponse(
            dataset_json=data.decode("utf-8"), table_tsv=table, report=report
        )

    @app.post("/codeswitch", response_model=schemas.DatasetResponse)
    def codeswitch(req: schemas.CodeSwitchRequest):
        data, report = ops.op_codeswitch(
            req.dataset_json.encode("utf-8"),
            req.dictionary_text,
            req.scope,
            req.choice,
            req.seed,
            req.policy,
            req.source_lang,
            req.target_lang,
        )
        return schemas.DatasetResponse(dataset_json=data.decode("utf-8"), report=report)

    @app.post("/reorder", response_model=schemas.DatasetResponse)
    def reorder(req: schemas.ReorderRequest):
        data, report = ops.op_reorder(
            req.dataset_json.encode("utf-8"), req.conllu_text, req.pattern, req.mode, req.cap
        )
        return schemas.DatasetResponse(dataset_json=data.decode("utf-8"), report=report)

    @app.post("/downsample", response_model=schemas.DatasetResponse)
    def downsample(req: schemas.DownsampleRequest):
        data, report = ops.op_downsample(
            req.dataset_json.encode("utf-8"), req.target, req.seed
        )
        return schemas.DatasetResponse(dataset_json=data.decode("utf-8"), report=report)

    @app.post("/eval", response_model=schemas.ReportResponse)
    def evaluate(req: schemas.EvalRequest):
        report = ops.op_eval(
            req.dataset_json.encode("utf-8"), req.predictions_json, req.lang
        )
        return schemas.ReportResponse(report=report)

    @app.post("/anova", response_model=schemas.ReportResponse)
    def anova(req: schemas.AnovaRequest):
        result = metrics.anova_oneway(req.groups)
        return schemas.ReportResponse(report=result.to_json())

    @app.post("/analyze", response_model=schemas.AnalyzeResponse)
    def analyze(req: schemas.AnalyzeRequest):
        table, report = ops.op_analyze(
            req.action,
            _b64(req.x_repm_b64),
            req.x_meta_tsv,
            _b64(req.y_repm_b64),
            req.y_meta_tsv,
            req.pairing_tsv,
            req.components,
            req.variance_fraction,
            req.epsilon,
        )
        return schemas.AnalyzeResponse(table_tsv=table, report=report)

    @app.post("/run", response_model=schemas.RunResponse)
    def run(req: schemas.RunRequest):
        m = manifest_mod.manifest_from_json(req.manifest)
        report = manifest_mod.run_manifest(m, req.base_dir)
        return schemas.RunResponse(report=report)

    return app


# module-level app for `uvicorn forgeqa.service.app:app`
app = create_app()
