"""HTTP layer tying prompts, providers, parsing, analysis, and emission
together.

Handlers are stateless and reentrant; the only shared state is the
immutable provider registry and the static grammar tables. Partial
pipeline failures (a model response with no grammar elements) still return
200 with the raw output and a diagnostic, because the platform's job is to
show the user what the model did, including failures to conform.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import fields as dataclass_fields
from pathlib import Path
from typing import Any, Literal, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .analysis import analyze_and_highlight
from .errors import (
    EmptyQuestionError,
    InvalidConfigError,
    MalformedProviderResponseError,
    MalformedTraceError,
    NoElementsError,
    NoSelectionFoundError,
    ProviderError,
    ProviderTimeoutError,
    RateLimitedError,
    ReasonGraphError,
    UnauthorizedError,
    UnknownMethodError,
    UnknownModelError,
    UnknownProviderError,
)
from .grammars import MethodParams, build_meta_prompt, build_prompt, parse_meta_selection
from .mermaid import Theme, VisualizationConfig, emit
from .model import (
    METHOD_DISPLAY_NAMES,
    ReasoningMethod,
    Severity,
    error,
    trace_from_dict,
    trace_to_dict,
    validate_trace,
)
from .parsing import RawModelOutput, parse
from .providers import GenerationRequest, ProviderRegistry, generate

logger = logging.getLogger("reasongraph.service")

DEFAULT_PORT = 8765


class MethodParamsBody(BaseModel):
    num_chains: int = Field(3, ge=1)
    beam_width: int = Field(2, ge=1)
    max_depth: int = Field(3, ge=1)
    max_refinements: int = Field(2, ge=1)
    num_subquestions_hint: Optional[int] = Field(None, ge=1)

    def to_params(self) -> MethodParams:
        params = MethodParams(
            num_chains=self.num_chains,
            beam_width=self.beam_width,
            max_depth=self.max_depth,
            max_refinements=self.max_refinements,
            num_subquestions_hint=self.num_subquestions_hint,
        )
        params.validate()
        return params


class GenerationParamsBody(BaseModel):
    temperature: float = Field(0.7, ge=0)
    max_tokens: int = Field(2048, ge=1)


_THEME_SLOTS = {f.name for f in dataclass_fields(Theme)}


class VizConfigBody(BaseModel):
    direction: Literal["top_down", "left_right"] = "top_down"
    wrap_width: int = Field(30, ge=8, le=120)
    show_scores: bool = True
    max_label_chars: int = Field(240, ge=8)
    theme: Optional[dict[str, str]] = None

    def to_config(self) -> VisualizationConfig:
        theme = Theme()
        if self.theme:
            unknown = set(self.theme) - _THEME_SLOTS
            if unknown:
                raise InvalidConfigError(f"unknown theme slots: {sorted(unknown)}")
            theme = Theme(**{**{f.name: getattr(theme, f.name) for f in dataclass_fields(Theme)}, **self.theme})
        config = VisualizationConfig(
            direction=self.direction,
            wrap_width=self.wrap_width,
            show_scores=self.show_scores,
            max_label_chars=self.max_label_chars,
            theme=theme,
        )
        config.validate()
        return config


class ReasonBody(BaseModel):
    question: str = Field(min_length=1)
    method: str
    provider: str
    model: str
    method_params: MethodParamsBody = Field(default_factory=MethodParamsBody)
    generation_params: GenerationParamsBody = Field(default_factory=GenerationParamsBody)
    viz_config: VizConfigBody = Field(default_factory=VizConfigBody)


class MetaReasonBody(BaseModel):
    question: str = Field(min_length=1)
    provider: str
    model: str
    method_params: MethodParamsBody = Field(default_factory=MethodParamsBody)
    generation_params: GenerationParamsBody = Field(default_factory=GenerationParamsBody)
    viz_config: VizConfigBody = Field(default_factory=VizConfigBody)


class RenderBody(BaseModel):
    trace: dict
    viz_config: VizConfigBody = Field(default_factory=VizConfigBody)


_GATEWAY_RESPONSES: tuple[tuple[type[ReasonGraphError], int, str], ...] = (
    (UnknownProviderError, 404, "unknown_provider"),
    (UnknownModelError, 404, "unknown_model"),
    (ProviderTimeoutError, 504, "timeout"),
    (UnauthorizedError, 502, "unauthorized"),
    (RateLimitedError, 502, "rate_limited"),
    (MalformedProviderResponseError, 502, "malformed_provider_response"),
    (ProviderError, 502, "provider_error"),
)

_METHOD_PARAM_FIELDS: dict[ReasoningMethod, tuple[str, ...]] = {
    ReasoningMethod.CHAIN_OF_THOUGHTS: (),
    ReasoningMethod.SELF_REFINE: ("max_refinements",),
    ReasoningMethod.LEAST_TO_MOST: ("num_subquestions_hint",),
    ReasoningMethod.SELF_CONSISTENCY: ("num_chains",),
    ReasoningMethod.TREE_OF_THOUGHTS: ("max_depth",),
    ReasoningMethod.BEAM_SEARCH: ("beam_width", "max_depth"),
}


def _methods_payload() -> list[dict[str, Any]]:
    defaults = MethodParams()
    payload = []
    for method in ReasoningMethod:
        params = [
            {
                "name": name,
                "type": "integer",
                "default": getattr(defaults, name),
                "minimum": 1,
            }
            for name in _METHOD_PARAM_FIELDS[method]
        ]
        payload.append(
            {
                "method": method.value,
                "display_name": METHOD_DISPLAY_NAMES[method],
                "params": params,
            }
        )
    return payload


def _pipeline(
    registry: ProviderRegistry,
    method: ReasoningMethod,
    question: str,
    provider: str,
    model: str,
    method_params: MethodParamsBody,
    generation_params: GenerationParamsBody,
    viz_config: VizConfigBody,
    generation_ms: float = 0.0,
) -> dict[str, Any]:
    viz = viz_config.to_config()
    prompt = build_prompt(method, question, method_params.to_params())
    started = time.perf_counter()
    result = generate(
        registry,
        GenerationRequest(
            provider=provider,
            model=model,
            prompt=prompt,
            temperature=generation_params.temperature,
            max_tokens=generation_params.max_tokens,
        ),
    )
    generation_ms += (time.perf_counter() - started) * 1000.0

    parse_started = time.perf_counter()
    try:
        trace, diagnostics = parse(RawModelOutput(result.text, method, question))
    except NoElementsError as exc:
        parse_ms = (time.perf_counter() - parse_started) * 1000.0
        diags = [error("no_elements", str(exc)), *exc.diagnostics]
        return {
            "raw_output": result.text,
            "trace": None,
            "diagram": "",
            "diagnostics": [d.to_dict() for d in diags],
            "analysis": None,
            "method_used": method.value,
            "timing": _timing(generation_ms, parse_ms, 0.0),
        }
    trace, analysis = analyze_and_highlight(trace, diagnostics)
    parse_ms = (time.perf_counter() - parse_started) * 1000.0

    emit_started = time.perf_counter()
    document = emit(trace, viz)
    emit_ms = (time.perf_counter() - emit_started) * 1000.0

    return {
        "raw_output": result.text,
        "trace": trace_to_dict(trace),
        "diagram": document.text,
        "diagnostics": [d.to_dict() for d in diagnostics],
        "analysis": analysis,
        "method_used": method.value,
        "timing": _timing(generation_ms, parse_ms, emit_ms),
    }


def _timing(generation_ms: float, parse_ms: float, emit_ms: float) -> dict[str, float]:
    return {
        "generation_ms": round(generation_ms, 3),
        "parse_ms": round(parse_ms, 3),
        "emit_ms": round(emit_ms, 3),
    }


def create_app(registry: ProviderRegistry, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="reasongraph", docs_url=None, redoc_url=None)

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        logger.info(
            json.dumps(
                {
                    "method": request.method,
                    "route": request.url.path,
                    "status": response.status_code,
                    "latency_ms": round((time.perf_counter() - started) * 1000.0, 3),
                }
            )
        )
        return response

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(part) for part in err.get("loc", ())], "message": err.get("msg", "")}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"error": "validation", "detail": detail})

    @app.exception_handler(ReasonGraphError)
    async def domain_handler(request: Request, exc: ReasonGraphError):
        for klass, status, code in _GATEWAY_RESPONSES:
            if isinstance(exc, klass):
                return JSONResponse(status_code=status, content={"error": code, "message": str(exc)})
        if isinstance(
            exc, (UnknownMethodError, EmptyQuestionError, InvalidConfigError, MalformedTraceError)
        ):
            return JSONResponse(status_code=400, content={"error": "validation", "message": str(exc)})
        return JSONResponse(status_code=500, content={"error": "internal", "message": str(exc)})

    @app.get("/api/methods")
    def list_methods():
        return _methods_payload()

    @app.get("/api/providers")
    def list_providers():
        return registry.view()

    @app.post("/api/reason")
    def reason(body: ReasonBody):
        method = ReasoningMethod.parse(body.method)
        return _pipeline(
            registry,
            method,
            body.question,
            body.provider,
            body.model,
            body.method_params,
            body.generation_params,
            body.viz_config,
        )

    @app.post("/api/meta-reason")
    def meta_reason(body: MetaReasonBody):
        prompt = build_meta_prompt(body.question)
        started = time.perf_counter()
        result = generate(
            registry,
            GenerationRequest(
                provider=body.provider,
                model=body.model,
                prompt=prompt,
                temperature=body.generation_params.temperature,
                max_tokens=body.generation_params.max_tokens,
            ),
        )
        meta_ms = (time.perf_counter() - started) * 1000.0
        try:
            method = parse_meta_selection(result.text)
        except (NoSelectionFoundError, UnknownMethodError) as exc:
            return JSONResponse(
                status_code=422,
                content={
                    "error": "meta_selection_failed",
                    "message": str(exc),
                    "raw_output": result.text,
                },
            )
        return _pipeline(
            registry,
            method,
            body.question,
            body.provider,
            body.model,
            body.method_params,
            body.generation_params,
            body.viz_config,
            generation_ms=meta_ms,
        )

    @app.post("/api/render")
    def render(body: RenderBody):
        trace = trace_from_dict(body.trace)
        diagnostics = validate_trace(trace)
        errors = [d for d in diagnostics if d.severity is Severity.ERROR]
        if errors:
            return JSONResponse(
                status_code=400,
                content={"error": "invalid_trace", "diagnostics": [d.to_dict() for d in errors]},
            )
        document = emit(trace, body.viz_config.to_config())
        return {"text": document.text, "id_map": dict(document.id_map), "styles": list(document.styles)}

    static_path = Path(static_dir) if static_dir is not None else None
    if static_path is not None and static_path.is_dir():
        app.mount("/", StaticFiles(directory=static_path, html=True), name="ui")
    else:

        @app.get("/")
        def index():
            return {
                "service": "reasongraph",
                "endpoints": [
                    "GET /api/methods",
                    "GET /api/providers",
                    "POST /api/reason",
                    "POST /api/meta-reason",
                    "POST /api/render",
                ],
            }

    return app
