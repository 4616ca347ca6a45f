"""Command-line interface and HTTP gateway.

The CLI keeps a strict channel discipline: stdout carries exactly one JSON
document per invocation, anything meant for humans goes to stderr, and the
exit code is 0 on success, 1 on runtime failure (with a JSON error object
on stderr), 2 on usage errors.  The gateway wraps the same pipeline behind
``POST /v1/answer`` and keeps every trace addressable by its content hash.

Configuration is layered: built-in defaults, then a JSON config file
(``--config`` flag or ``ACURAI_CONFIG``), then environment variables,
which always win.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__, harness, nlp, pipeline
from .facts import FFFConfig, build_fact_sets
from .llm import (
    ChatClient,
    HTTPChatClient,
    LLMError,
    RecordingClient,
    ReplayClient,
    default_cassette_path,
)
from .pipeline import PipelineConfig, PipelineError
from .query_split import AtomicQuery, split_query

_APP_KEYS = {"pipeline", "replay", "record", "trace_dir",
             "llm_base_url", "llm_api_key", "embed_api_key"}


@dataclass(frozen=True)
class AppConfig:
    """Resolved application settings shared by the CLI and the gateway."""

    pipeline: PipelineConfig
    replay: str | None = None
    record: str | None = None
    trace_dir: str | None = None
    llm_base_url: str | None = None
    llm_api_key: str | None = None
    embed_api_key: str | None = None


def load_config(path: str | None = None, env=os.environ) -> AppConfig:
    """Build an :class:`AppConfig` from file and environment.

    ``path`` falls back to ``ACURAI_CONFIG``; no file at all means pure
    defaults.  For the connection settings the environment variables
    ``ACURAI_LLM_BASE_URL``, ``ACURAI_LLM_API_KEY`` and
    ``ACURAI_EMBED_API_KEY`` override whatever the file says.
    """
    data: dict = {}
    config_path = path or env.get("ACURAI_CONFIG")
    if config_path:
        try:
            data = json.loads(Path(config_path).read_text("utf-8"))
        except OSError as exc:
            raise ValueError(f"cannot read config {config_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValueError(f"config {config_path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"config {config_path} must hold a JSON object")
        unknown = set(data) - _APP_KEYS
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return AppConfig(
        pipeline=PipelineConfig.from_json(data.get("pipeline", {})),
        replay=data.get("replay"),
        record=data.get("record"),
        trace_dir=data.get("trace_dir"),
        llm_base_url=env.get("ACURAI_LLM_BASE_URL") or data.get("llm_base_url"),
        llm_api_key=env.get("ACURAI_LLM_API_KEY") or data.get("llm_api_key"),
        embed_api_key=env.get("ACURAI_EMBED_API_KEY") or data.get("embed_api_key"),
    )


def make_client(config: AppConfig) -> ChatClient:
    """Pick the chat client the settings imply: replay a cassette when one
    is named, record live traffic when asked, call the configured endpoint
    when one exists, and otherwise replay the bundled demo cassette so the
    tool works offline out of the box."""
    if config.replay:
        return ReplayClient(config.replay)
    if config.record:
        live = HTTPChatClient(config.llm_base_url, config.llm_api_key)
        return RecordingClient(live, config.record)
    if config.llm_base_url:
        return HTTPChatClient(config.llm_base_url, config.llm_api_key)
    return ReplayClient(default_cassette_path())


def _merge_flags(config: AppConfig, args: argparse.Namespace) -> AppConfig:
    updates = {}
    for name in ("replay", "record", "trace_dir"):
        value = getattr(args, name, None)
        if value:
            updates[name] = value
    return replace(config, **updates) if updates else config


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, ensure_ascii=False))


def _read_json(path: str) -> dict:
    try:
        obj = json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValueError(f"{path} must hold a JSON object")
    return obj


def _passages_from(obj: dict, path: str) -> list[str]:
    passages = obj.get("passages")
    if (
        not isinstance(passages, list)
        or not passages
        or not all(isinstance(p, str) and p.strip() for p in passages)
    ):
        raise ValueError(f"{path} needs a non-empty 'passages' list of strings")
    return passages


def cmd_split_query(args: argparse.Namespace, config: AppConfig) -> int:
    result = split_query(args.query, cap=config.pipeline.split_cap)
    _emit(
        {
            "original": result.original,
            "queries": [q.text for q in result.queries],
            "was_split": result.was_split,
            "truncated": result.truncated,
        }
    )
    return 0


def cmd_fff(args: argparse.Namespace, config: AppConfig) -> int:
    obj = _read_json(args.passages)
    passages = _passages_from(obj, args.passages)
    nps = nlp.extract_noun_phrases(args.entity)
    if not nps:
        raise ValueError(f"--entity {args.entity!r} contains no noun phrase")
    query = AtomicQuery(text=args.entity, focal_nps=(nps[-1],), parent_query=args.entity)
    fff_config = FFFConfig(
        model=config.pipeline.model,
        temperature=config.pipeline.temperature,
        collision_threshold=config.pipeline.collision_threshold,
    )
    packets = build_fact_sets(passages, [query], llm=make_client(config), config=fff_config)
    _emit(packets[query].fact_set.to_json())
    return 0


def cmd_run(args: argparse.Namespace, config: AppConfig) -> int:
    obj = _read_json(args.record_file)
    query = obj.get("query")
    if not isinstance(query, str) or not query.strip():
        raise ValueError(f"{args.record_file} needs a non-empty 'query' string")
    passages = _passages_from(obj, args.record_file)
    response, trace = pipeline.run(query, passages, config.pipeline, make_client(config))
    trace_path = trace.write(config.trace_dir or "traces")
    print(f"trace written to {trace_path}", file=sys.stderr)
    _emit(
        {
            "answer": response,
            "verdict": trace.final_verdict,
            "trace_id": trace.trace_id,
            "trace_path": str(trace_path),
        }
    )
    return 0


def cmd_eval(args: argparse.Namespace, config: AppConfig) -> int:
    dataset = harness.load_dataset(args.dataset)
    for number, message in dataset.errors:
        print(f"{args.dataset}:{number}: skipped malformed record: {message}", file=sys.stderr)
    summary = harness.evaluate(
        dataset.records, llm=make_client(config), config=config.pipeline, workers=args.workers
    )
    payload = summary.to_json()
    payload["dataset_errors"] = [
        {"line": number, "message": message} for number, message in dataset.errors
    ]
    if args.csv:
        harness.write_csv(summary, args.csv)
        print(f"per-record outcomes written to {args.csv}", file=sys.stderr)
    _emit(payload)
    return 0 if summary.all_faithful and not dataset.errors else 1


def cmd_serve(args: argparse.Namespace, config: AppConfig) -> int:
    import uvicorn

    uvicorn.run(create_app(config), host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_wilson(args: argparse.Namespace, config: AppConfig) -> int:
    low, high = harness.wilson_interval(args.successes, args.n, args.z)
    _emit({"low": round(low, 4), "high": round(high, 4)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    # The shared flags are valid both before and after the subcommand; the
    # SUPPRESS default keeps a later parser from clobbering a value an
    # earlier one already set.
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument(
        "--config", default=argparse.SUPPRESS, help="JSON config file (default: $ACURAI_CONFIG)"
    )
    shared.add_argument(
        "--replay", default=argparse.SUPPRESS, help="serve LLM calls from this cassette file"
    )
    shared.add_argument(
        "--record", default=argparse.SUPPRESS, help="record live LLM calls into this cassette file"
    )
    shared.add_argument(
        "--trace-dir", dest="trace_dir", default=argparse.SUPPRESS,
        help="directory for trace files",
    )

    parser = argparse.ArgumentParser(
        prog="acurai",
        description="Query splitting, fact extraction, and faithful answer synthesis.",
        parents=[shared],
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str, handler) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text, parents=[shared])
        sub.set_defaults(handler=handler)
        return sub

    sub = command("split-query", "split a question on colliding noun phrases", cmd_split_query)
    sub.add_argument("query")

    sub = command("fff", "extract fully-formatted facts about one entity", cmd_fff)
    sub.add_argument("passages", help='JSON file with {"passages": [...]}')
    sub.add_argument("--entity", required=True, help="noun phrase the facts should be about")

    sub = command("run", "answer one record end to end", cmd_run)
    # dest avoids the shared --record flag's namespace slot
    sub.add_argument(
        "record_file", metavar="record",
        help='JSON file with {"query": ..., "passages": [...]}',
    )

    sub = command("eval", "evaluate a JSONL dataset; exit 0 iff all faithful", cmd_eval)
    sub.add_argument("dataset")
    sub.add_argument("--workers", type=int, default=1)
    sub.add_argument("--csv", help="also write per-record outcomes to this CSV file")

    sub = command("serve", "start the HTTP gateway", cmd_serve)
    sub.add_argument("--host", default="127.0.0.1")
    sub.add_argument("--port", type=int, default=8000)

    sub = command("wilson", "Wilson score interval for successes out of n", cmd_wilson)
    sub.add_argument("successes", type=int)
    sub.add_argument("n", type=int)
    sub.add_argument("--z", type=float, default=harness.DEFAULT_Z)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _merge_flags(load_config(getattr(args, "config", None)), args)
        return args.handler(args, config)
    except (ValueError, PipelineError, LLMError, harness.DatasetError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1


def create_app(config: AppConfig | None = None, llm: ChatClient | None = None):
    """Build the gateway application.

    ``POST /v1/answer`` runs the pipeline, ``GET /v1/trace/{id}`` returns
    the stored trace for a previous answer, and ``GET /healthz`` reports
    liveness.  Validation problems come back as 400 with per-field
    messages; backend failures as 502 with a Retry-After header whenever
    the backend supplied one.
    """
    from typing import Annotated

    from fastapi import Body, FastAPI
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse
    from pydantic import BaseModel, ConfigDict, Field

    config = config or load_config()
    client = llm or make_client(config)
    traces: dict[str, dict] = {}

    class AnswerOptions(BaseModel):
        model_config = ConfigDict(extra="forbid", protected_namespaces=())
        model: str | None = None
        include_specifics: bool | None = None

    class AnswerRequest(BaseModel):
        model_config = ConfigDict(extra="forbid")
        query: str = Field(min_length=1)
        passages: list[str] = Field(min_length=1)
        options: AnswerOptions | None = None

    app = FastAPI(title="acurai gateway", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request, exc):
        fields = [
            {
                "field": ".".join(str(part) for part in error["loc"] if part != "body"),
                "message": error["msg"],
            }
            for error in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"error": "invalid request", "fields": fields})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "service": "acurai", "version": __version__}

    @app.post("/v1/answer")
    def answer(request: Annotated[AnswerRequest, Body()]):
        pipe = config.pipeline
        if request.options:
            if request.options.model:
                pipe = replace(pipe, model=request.options.model)
            if request.options.include_specifics is not None:
                pipe = replace(pipe, include_specifics=request.options.include_specifics)
        timings: dict[str, float] = {}
        started = time.perf_counter()
        try:
            response, trace = pipeline.run(
                request.query, list(request.passages), pipe, client, timings=timings
            )
        except (PipelineError, LLMError, ValueError) as exc:
            cause = exc if isinstance(exc, LLMError) else exc.__cause__
            kind = getattr(cause, "kind", "pipeline")
            retry_after = getattr(cause, "retry_after", None)
            headers = {"Retry-After": str(int(retry_after))} if retry_after else {}
            return JSONResponse(
                status_code=502,
                content={"error": str(exc), "kind": kind},
                headers=headers,
            )
        timings["total"] = round((time.perf_counter() - started) * 1000.0, 3)
        traces[trace.trace_id] = {"trace_id": trace.trace_id, **trace.to_json()}
        if config.trace_dir:
            trace.write(config.trace_dir)
        return {
            "answer": response,
            "verdict": trace.final_verdict,
            "trace_id": trace.trace_id,
            "timings": timings,
        }

    @app.get("/v1/trace/{trace_id}")
    def get_trace(trace_id: str):
        stored = traces.get(trace_id)
        if stored is None and config.trace_dir:
            path = Path(config.trace_dir) / f"{trace_id}.json"
            if path.is_file():
                stored = json.loads(path.read_text("utf-8"))
        if stored is None:
            return JSONResponse(
                status_code=404, content={"error": f"unknown trace id {trace_id!r}"}
            )
        return stored

    return app


if __name__ == "__main__":
    sys.exit(main())
