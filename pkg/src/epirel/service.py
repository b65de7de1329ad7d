"""HTTP API over the extraction pipeline.

Three endpoints: POST /api/extract runs prompt -> generate -> parse ->
annotate and returns the raw, JSON, and article views in one response;
GET /api/models lists the registry; GET /api/health probes backends.
The CLI shares run_extraction(), so both paths emit identical JSON.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .annotate import annotated_to_dict, locate_entities
from .inference_client import (
    BackendError,
    BackendUnreachable,
    DEFAULT_MODELS,
    GenerationRequest,
    InferenceClient,
    ModelSpec,
    Timeout,
    UnknownModel,
    load_models_config,
)
from .output_parser import parse_output, report_to_dict
from .prompting import render
from .schema import RELATION_SURFACE, RelationSchema, default_schema

DEFAULT_MAX_TOKENS_LIMIT = 4096
DEFAULT_MAX_ARTICLE_BYTES = 1_048_576


@dataclass(frozen=True)
class ServiceConfig:
    models: tuple[ModelSpec, ...] = DEFAULT_MODELS
    max_tokens_limit: int = DEFAULT_MAX_TOKENS_LIMIT
    max_article_bytes: int = DEFAULT_MAX_ARTICLE_BYTES
    cors_origins: tuple[str, ...] = ("*",)
    probe_timeout: float = 1.5
    death_host_extension: bool = False
    request_timeout: float = 120.0
    retries: int = 2


def load_service_config(path: str) -> ServiceConfig:
    """Build a ServiceConfig from a models TOML file."""
    models, limits = load_models_config(path)
    return ServiceConfig(
        models=models,
        max_tokens_limit=limits.get("max_tokens_limit", DEFAULT_MAX_TOKENS_LIMIT),
        max_article_bytes=limits.get("max_article_bytes", DEFAULT_MAX_ARTICLE_BYTES),
        cors_origins=tuple(limits.get("cors_origins", ("*",))),
    )


def run_extraction(client: InferenceClient, schema: RelationSchema, spec: ModelSpec,
                   article: str, max_tokens: int, temperature: float = 0.0,
                   strict: bool = False) -> dict:
    """The whole pipeline for one article; returns the response dict."""
    started = time.perf_counter()
    prompt = render(spec.template, article)
    generation = client.generate(GenerationRequest(
        model=spec.id, prompt=prompt, max_tokens=max_tokens, temperature=temperature,
    ))
    report = parse_output(generation.raw, schema, strict=strict)

    entity_rows: list[dict] = []
    seen_entities = set()
    for triple in report.triples:
        for entity in (triple.subject, triple.object):
            key = (entity.etype, entity.surface)
            if key not in seen_entities:
                seen_entities.add(key)
                entity_rows.append({"text": entity.surface, "type": entity.etype.value})

    relation_rows = [
        {
            "subject": t.subject.surface,
            "relation": RELATION_SURFACE[t.relation],
            "object": t.object.surface,
        }
        for t in report.triples
    ]

    entities = [t_entity for t in report.triples for t_entity in (t.subject, t.object)]
    annotated = locate_entities(article, entities)

    return {
        "raw": generation.raw.text,
        "relations": report_to_dict(report),
        "annotated": annotated_to_dict(annotated),
        "entity_table": entity_rows,
        "relation_table": relation_rows,
        "timing_ms": max(0, int(round((time.perf_counter() - started) * 1000))),
    }


class ExtractBody(BaseModel):
    article: str
    model: str
    max_tokens: int


def create_app(config: ServiceConfig | None = None,
               client: InferenceClient | None = None) -> FastAPI:
    """Build the application; refuses an empty model registry."""
    config = config or ServiceConfig()
    if not config.models:
        raise ValueError("refusing to start with an empty model registry")
    client = client or InferenceClient(
        models=config.models, timeout=config.request_timeout, retries=config.retries,
    )
    schema = default_schema(death_host_extension=config.death_host_extension)

    app = FastAPI(title="epirel", docs_url=None, redoc_url=None)
    app.state.config = config
    app.state.client = client
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def invalid_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/api/models")
    def list_models() -> list[dict]:
        return [{"id": m.id, "display_name": m.display_name} for m in client.list_models()]

    @app.get("/api/health")
    def health() -> dict:
        backends = {m.id: client.probe(m.id, timeout=config.probe_timeout)
                    for m in client.list_models()}
        return {
            "status": "ok",
            "backends": backends,
            "max_tokens_limit": config.max_tokens_limit,
        }

    @app.post("/api/extract")
    def extract(body: ExtractBody):
        if len(body.article.encode("utf-8")) > config.max_article_bytes:
            return JSONResponse(status_code=413, content={"detail": "article too large"})
        if not body.article.strip():
            return JSONResponse(status_code=400, content={"detail": "article is empty"})
        if not 1 <= body.max_tokens <= config.max_tokens_limit:
            return JSONResponse(
                status_code=400,
                content={"detail": f"max_tokens must be in [1, {config.max_tokens_limit}]"},
            )
        try:
            spec = client.get_model(body.model)
        except UnknownModel as exc:
            return JSONResponse(status_code=404, content={"detail": str(exc)})
        try:
            return run_extraction(client, schema, spec, body.article, body.max_tokens)
        except Timeout as exc:
            return JSONResponse(status_code=504, content={"detail": str(exc)})
        except (BackendUnreachable, BackendError) as exc:
            detail = {"detail": str(exc)}
            if isinstance(exc, BackendError):
                detail["backend_status"] = exc.status
                detail["backend_body"] = exc.body[:2000]
            return JSONResponse(status_code=502, content=detail)

    return app


def mount_static_ui(app: FastAPI, directory: str) -> None:
    """Serve built UI assets at the root path."""
    from fastapi.staticfiles import StaticFiles

    app.mount("/", StaticFiles(directory=directory, html=True), name="ui")
