"""HTTP client for OpenAI-compatible text-generation backends.

Models are declared in a registry (code default or TOML config). Requests
go to ``{endpoint}/v1/chat/completions`` or ``{endpoint}/v1/completions``
depending on the model kind. Transport failures are retried with
exponential backoff; HTTP error statuses are not. Endpoints with the
``stub:`` scheme are served by a deterministic in-process fake so the whole
pipeline runs offline.
"""

from __future__ import annotations

import os
import sys
import time
from dataclasses import dataclass
from importlib import resources

import httpx

from .output_parser import RawModelOutput
from .prompting import RenderedPrompt

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_TIMEOUT = 120.0
DEFAULT_RETRIES = 2
DEFAULT_BACKOFF_BASE = 0.25

ENDPOINT_ENV_PREFIX = "EPIREL_ENDPOINT_"


class InferenceError(Exception):
    pass


class UnknownModel(InferenceError):
    def __init__(self, model_id: str):
        super().__init__(f"unknown model: {model_id!r}")
        self.model_id = model_id


class BackendUnreachable(InferenceError):
    pass


class Timeout(InferenceError):
    pass


class BackendError(InferenceError):
    def __init__(self, status: int, body: str):
        super().__init__(f"backend returned HTTP {status}")
        self.status = status
        self.body = body


@dataclass(frozen=True)
class ModelSpec:
    """One selectable model: where to reach it and how to talk to it."""

    id: str
    display_name: str
    endpoint: str
    kind: str = "completion"  # "chat" | "completion"
    template: str = "inference"

    def __post_init__(self):
        if self.kind not in ("chat", "completion"):
            raise ValueError(f"model kind must be chat or completion, got {self.kind!r}")

    @property
    def is_stub(self) -> bool:
        return self.endpoint.startswith("stub:")


DEFAULT_MODELS: tuple[ModelSpec, ...] = (
    ModelSpec(id="openorca", display_name="OpenOrca-Platypus2-13B", endpoint="stub:"),
    ModelSpec(id="mythical-destroyer", display_name="Mythical-Destroyer-V2-L2-13B",
              endpoint="stub:"),
)


@dataclass(frozen=True)
class GenerationRequest:
    """One generation call; temperature defaults to 0 for determinism."""

    model: str
    prompt: RenderedPrompt
    max_tokens: int
    temperature: float = 0.0

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class GenerationResponse:
    raw: RawModelOutput
    latency_ms: int
    backend_id: str


# Canned completion the stub backend returns for prompts that mention
# avian influenza; anything else gets the empty-result sentinel.
def stub_completion(prompt_text: str) -> str:
    if "avian influenza" in prompt_text.casefold():
        return _canned_block()
    return "No relations found."


def _canned_block() -> str:
    return resources.files(__package__).joinpath("data", "example_output.txt") \
        .read_text("utf-8").rstrip("\n")


def apply_endpoint_overrides(models: tuple[ModelSpec, ...],
                             env: dict | None = None) -> tuple[ModelSpec, ...]:
    """Apply EPIREL_ENDPOINT_<ID> environment overrides to the registry."""
    env = os.environ if env is None else env
    out = []
    for spec in models:
        var = ENDPOINT_ENV_PREFIX + spec.id.upper().replace("-", "_")
        endpoint = env.get(var, spec.endpoint)
        out.append(spec if endpoint == spec.endpoint
                   else ModelSpec(spec.id, spec.display_name, endpoint, spec.kind, spec.template))
    return tuple(out)


def load_models_config(path: str) -> tuple[tuple[ModelSpec, ...], dict]:
    """Read a models TOML file; returns (models, limits dict).

    Expected shape::

        [limits]
        max_tokens_limit = 4096

        [[models]]
        id = "openorca"
        display_name = "OpenOrca-Platypus2-13B"
        endpoint = "stub:"
        kind = "completion"      # or "chat"
        template = "inference"   # or "annotation"
    """
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    models = tuple(
        ModelSpec(
            id=entry["id"],
            display_name=entry["display_name"],
            endpoint=entry["endpoint"],
            kind=entry.get("kind", "completion"),
            template=entry.get("template", "inference"),
        )
        for entry in data.get("models", [])
    )
    ids = [m.id for m in models]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate model ids in config")
    return apply_endpoint_overrides(models), data.get("limits", {})


class InferenceClient:
    """Thread-safe client over a model registry; one HTTP pool, no state."""

    def __init__(self, models: tuple[ModelSpec, ...] = DEFAULT_MODELS,
                 timeout: float = DEFAULT_TIMEOUT, retries: int = DEFAULT_RETRIES,
                 backoff_base: float = DEFAULT_BACKOFF_BASE,
                 transport: httpx.BaseTransport | None = None,
                 sleep=time.sleep):
        models = apply_endpoint_overrides(models)
        self._models = {m.id: m for m in models}
        self._order = tuple(m.id for m in models)
        self._retries = retries
        self._backoff_base = backoff_base
        self._sleep = sleep
        self._http = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._http.close()

    def list_models(self) -> list[ModelSpec]:
        return [self._models[mid] for mid in self._order]

    def get_model(self, model_id: str) -> ModelSpec:
        try:
            return self._models[model_id]
        except KeyError:
            raise UnknownModel(model_id) from None

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        """Run one generation; retries transport errors only, never HTTP 4xx."""
        spec = self.get_model(request.model)
        if request.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        start = time.perf_counter()
        if spec.is_stub:
            text = stub_completion(request.prompt.full_text)
            return self._response(spec, text, start, backend_id="stub")
        url, payload = self._build_call(spec, request)
        last_exc: Exception | None = None
        for attempt in range(self._retries + 1):
            if attempt:
                self._sleep(self._backoff_base * (2 ** (attempt - 1)))
            try:
                resp = self._http.post(url, json=payload)
            except httpx.TimeoutException as exc:
                last_exc = Timeout(f"backend timed out: {exc}")
                continue
            except httpx.TransportError as exc:
                last_exc = BackendUnreachable(f"transport failure: {exc}")
                continue
            if resp.status_code >= 400:
                raise BackendError(resp.status_code, resp.text)
            text = self._extract_text(spec, resp)
            return self._response(spec, text, start, backend_id=spec.endpoint)
        raise last_exc

    def probe(self, model_id: str, timeout: float = 1.5) -> bool:
        """Lightweight reachability check; any HTTP response counts."""
        spec = self.get_model(model_id)
        if spec.is_stub:
            return True
        try:
            self._http.get(spec.endpoint.rstrip("/") + "/v1/models", timeout=timeout)
        except httpx.HTTPError:
            return False
        return True

    def _build_call(self, spec: ModelSpec, request: GenerationRequest):
        base = spec.endpoint.rstrip("/")
        prompt = request.prompt
        if spec.kind == "chat":
            messages = []
            if prompt.system:
                messages.append({"role": "system", "content": prompt.system})
            messages.append({"role": "user", "content": prompt.user})
            payload = {
                "model": spec.id,
                "messages": messages,
                "max_tokens": request.max_tokens,
                "temperature": request.temperature,
            }
            return base + "/v1/chat/completions", payload
        payload = {
            "model": spec.id,
            "prompt": prompt.full_text,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        }
        return base + "/v1/completions", payload

    @staticmethod
    def _extract_text(spec: ModelSpec, resp: httpx.Response) -> str:
        try:
            data = resp.json()
            choice = data["choices"][0]
            return choice["message"]["content"] if spec.kind == "chat" else choice["text"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendError(resp.status_code, f"malformed completion body: {exc}") from exc

    def _response(self, spec: ModelSpec, text: str, start: float,
                  backend_id: str) -> GenerationResponse:
        latency_ms = max(0, int(round((time.perf_counter() - start) * 1000)))
        return GenerationResponse(
            raw=RawModelOutput(text=text, model_id=spec.id),
            latency_ms=latency_ms,
            backend_id=backend_id,
        )
