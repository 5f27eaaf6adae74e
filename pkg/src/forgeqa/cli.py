"""`forge` command-line interface.

The CLI is a thin client of the HTTP service: every subcommand marshals
local files into a request, posts it, and writes the response payloads back
to disk. By default the service runs in-process over an ASGI transport (no
daemon, no sockets); pass ``--server URL`` to target a running instance
instead. ``forge serve`` starts one.
"""

from __future__ import annotations

import argparse
import asyncio
import base64
import json
import sys
from pathlib import Path

import httpx

from . import __version__


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _read_b64(path: str) -> str:
    return base64.b64encode(Path(path).read_bytes()).decode("ascii")


def _write_text(path: str, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")


class ServiceClient:
    """POSTs to a remote service, or to the in-process app when no URL given."""

    def __init__(self, server: str | None):
        self.server = server

    def post(self, path: str, payload: dict) -> dict:
        async def _go():
            if self.server is None:
                from .service.app import create_app

                transport = httpx.ASGITransport(app=create_app())
                async with httpx.AsyncClient(
                    transport=transport, base_url="http://forge.internal", timeout=None
                ) as client:
                    return await client.post(path, json=payload)
            async with httpx.AsyncClient(base_url=self.server, timeout=600.0) as client:
                return await client.post(path, json=payload)

        response = asyncio.run(_go())
        body = response.json()
        if response.status_code != 200:
            error = body.get("error") or {"type": "HTTPError", "message": str(body)}
            raise CliError(error)
        return body


class CliError(Exception):
    def __init__(self, error: dict):
        super().__init__(error.get("message", "error"))
        self.error = error


def _emit_report(report: dict, report_path: str | None, quiet: bool = False) -> None:
    text = json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2)
    if report_path:
        _write_text(report_path, text + "\n")
    if not quiet:
        print(text)


def _cmd_recover(args, client: ServiceClient) -> int:
    body = client.post(
        "/recover",
        {
            "dataset_json": _read_text(args.dataset),
            "triples_tsv": _read_text(args.triples),
            "mode": args.mode,
            "cap": args.cap,
        },
    )
    _write_text(args.out, body["dataset_json"])
    _emit_report(body["report"], args.report)
    return 0


def _cmd_permute(args, client: ServiceClient) -> int:
    payload = {
        "dataset_json": _read_text(args.dataset),
        "seed": args.seed,
        "policy": args.policy,
        "derangement": not args.allow_fixed_points,
    }
    if args.table_in:
        payload["table_tsv"] = _read_text(args.table_in)
    body = client.post("/permute", payload)
    _write_text(args.out, body["dataset_json"])
    if args.table_out:
        _write_text(args.table_out, body["table_tsv"])
    _emit_report(body["report"], args.report)
    return 0


def _cmd_codeswitch(args, client: ServiceClient) -> int:
    body = client.post(
        "/codeswitch",
        {
            "dataset_json": _read_text(args.dataset),
            "dictionary_text": _read_text(args.dict),
            "scope": args.scope,
            "choice": args.choice,
            "seed": args.seed,
            "policy": args.policy,
            "source_lang": args.source_lang,
            "target_lang": args.target_lang,
        },
    )
    _write_text(args.out, body["dataset_json"])
    _emit_report(body["report"], args.report)
    return 0


def _cmd_reorder(args, client: ServiceClient) -> int:
    body = client.post(
        "/reorder",
        {
            "dataset_json": _read_text(args.dataset),
            "conllu_text": _read_text(args.parses),
            "pattern": args.pattern,
            "mode": args.mode,
            "cap": args.cap,
        },
    )
    _write_text(args.out, body["dataset_json"])
    _emit_report(body["report"], args.report)
    return 0


def _cmd_downsample(args, client: ServiceClient) -> int:
    body = client.post(
        "/downsample",
        {
            "dataset_json": _read_text(args.dataset),
            "target": args.target,
            "seed": args.seed,
        },
    )
    _write_text(args.out, body["dataset_json"])
    _emit_report(body["report"], args.report)
    return 0


def _cmd_eval(args, client: ServiceClient) -> int:
    body = client.post(
        "/eval",
        {
            "dataset_json": _read_text(args.dataset),
            "predictions_json": _read_text(args.predictions),
            "lang": args.lang,
        },
    )
    _emit_report(body["report"], args.report)
    return 0


def _cmd_anova(args, client: ServiceClient) -> int:
    groups = json.loads(_read_text(args.groups))
    body = client.post("/anova", {"groups": groups})
    _emit_report(body["report"], args.report)
    return 0


def _cmd_analyze(args, client: ServiceClient) -> int:
    payload = {
        "action": args.action,
        "x_repm_b64": _read_b64(args.x),
        "components": args.components,
        "variance_fraction": args.tau,
        "epsilon": args.epsilon,
    }
    if args.x_meta:
        payload["x_meta_tsv"] = _read_text(args.x_meta)
    if args.y:
        payload["y_repm_b64"] = _read_b64(args.y)
    if args.y_meta:
        payload["y_meta_tsv"] = _read_text(args.y_meta)
    if args.pairing:
        payload["pairing_tsv"] = _read_text(args.pairing)
    body = client.post("/analyze", payload)
    if args.out and body["table_tsv"]:
        _write_text(args.out, body["table_tsv"])
    _emit_report(body["report"], args.report)
    return 0


def _cmd_run(args, client: ServiceClient) -> int:
    manifest_path = Path(args.manifest)
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    base_dir = args.base_dir or str(manifest_path.resolve().parent)
    body = client.post("/run", {"manifest": manifest, "base_dir": base_dir})
    report = body["report"]
    _emit_report(report, args.report)
    return 0 if report.get("status") == "ok" else 1


def _cmd_serve(args, _client: ServiceClient) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forge",
        description="Deterministic corpus forging and analysis for multilingual extractive QA.",
    )
    parser.add_argument("--version", action="version", version=f"forge {__version__}")
    parser.add_argument(
        "--server",
        default=None,
        help="URL of a running forge service; default runs the service in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recover", help="relocate translated answers by edit distance")
    p.add_argument("--dataset", required=True)
    p.add_argument("--triples", required=True, help="translated triples TSV")
    p.add_argument("--mode", choices=["train", "test"], default="train")
    p.add_argument("--cap", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("permute", help="build an unseen language by vocabulary permutation")
    p.add_argument("--dataset", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--policy", choices=["space", "cjk", "mixed"], default="mixed")
    p.add_argument("--allow-fixed-points", action="store_true")
    p.add_argument("--table-in", help="apply an existing permutation table")
    p.add_argument("--table-out", help="write the permutation table TSV")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_permute)

    p = sub.add_parser("codeswitch", help="dictionary word-for-word substitution")
    p.add_argument("--dataset", required=True)
    p.add_argument("--dict", required=True, help="bilingual dictionary (one pair per line)")
    p.add_argument("--scope", choices=["context", "question", "both"], default="both")
    p.add_argument("--choice", choices=["first", "seeded"], default="first")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--policy", choices=["space", "cjk", "mixed"], default="mixed")
    p.add_argument("--source-lang", default="src")
    p.add_argument("--target-lang", default="tgt")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_codeswitch)

    p = sub.add_parser("reorder", help="re-linearize into a target constituent order")
    p.add_argument("--dataset", required=True)
    p.add_argument("--parses", required=True, help="CoNLL-U parses in dataset order")
    p.add_argument("--pattern", required=True, choices=["svo", "sov", "vos", "vso", "osv", "ovs"])
    p.add_argument("--mode", choices=["train", "test"], default="train")
    p.add_argument("--cap", type=int, default=10)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_reorder)

    p = sub.add_parser("downsample", help="seeded uniform sample of qa entries")
    p.add_argument("--dataset", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_downsample)

    p = sub.add_parser("eval", help="EM/F1 evaluation")
    p.add_argument("--dataset", required=True)
    p.add_argument("--predictions", required=True, help="JSON map id -> answer")
    p.add_argument("--lang", choices=["english", "english-like", "cjk", "mixed"], default="mixed")
    p.add_argument("--report")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("anova", help="one-way ANOVA over groups")
    p.add_argument("groups", help="JSON file: list of lists of numbers")
    p.add_argument("--report")
    p.set_defaults(func=_cmd_anova)

    p = sub.add_parser("analyze", help="representation analyses")
    p.add_argument("action", choices=["cosine", "pca", "svcca", "procrustes", "info"])
    p.add_argument("--x", required=True, help="representation matrix (REPM)")
    p.add_argument("--x-meta", help="sidecar metadata TSV")
    p.add_argument("--y")
    p.add_argument("--y-meta")
    p.add_argument("--pairing", help="two-column example-id pairing TSV")
    p.add_argument("--components", type=int, default=2)
    p.add_argument("--tau", type=float, default=0.99, help="retained variance fraction")
    p.add_argument("--epsilon", type=float, default=1e-10, help="whitening ridge")
    p.add_argument("--out", help="table TSV output path")
    p.add_argument("--report")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("run", help="execute a manifest")
    p.add_argument("manifest")
    p.add_argument("--base-dir", help="resolve manifest paths here (default: manifest dir)")
    p.add_argument("--report")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    client = ServiceClient(args.server)
    try:
        return args.func(args, client)
    except CliError as exc:
        print(json.dumps({"error": exc.error}, ensure_ascii=False), file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(
            json.dumps(
                {"error": {"type": type(exc).__name__, "message": str(exc)}},
                ensure_ascii=False,
            ),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
