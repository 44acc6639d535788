"""HTTP service exposing the pipeline: train, predict, step sessions,
execute, and platform inspection.

One platform instance per process (one simulated home). Model training is
content-addressed so identical payloads map to the same model id. Platform
and session mutations are serialized behind a single lock; prediction is
read-only and lock-free once the model is fetched.
"""

from __future__ import annotations

import hashlib
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import demo as packaged
from .errors import (
    EmptyCorpus,
    HelionError,
    IllegalState,
    MalformedToken,
    SessionExhausted,
    UnknownEntity,
)
from .generation import Flavor, GenerationSession, generate
from .model import ModelConfig, NGramModel, corpus_vocab_size, parse_history, train
from .scheduling import dump_corpus, load_corpus
from .simulator import build_registry, execute_scenario, policies_from_obj, snapshot
from .tokens import Vocabulary, routines_from_obj

SESSION_TTL_SECONDS = 3600.0


class ApiError(Exception):
    """Carries the HTTP status and the uniform error body."""

    def __init__(self, status: int, error_code: str, message: str, detail: dict | None = None):
        super().__init__(message)
        self.status = status
        self.body = {
            "error_code": error_code,
            "message": message,
            "detail": detail or {},
        }


@dataclass
class SessionRecord:
    session_id: str
    session: GenerationSession
    created_at: float
    order: int
    flavor: Flavor


@dataclass
class ModelRecord:
    model_id: str
    model: NGramModel
    vocab_size: int
    event_count: int


class ServiceEngine:
    """Process-wide state: model registry, sessions, and the platform."""

    def __init__(self, vocab: Vocabulary, session_ttl: float = SESSION_TTL_SECONDS):
        self.vocab = vocab
        self.models: dict[str, ModelRecord] = {}
        self.sessions: dict[str, SessionRecord] = {}
        self.platform = build_registry(vocab)
        self.session_ttl = session_ttl
        self.lock = threading.RLock()

    # -- models ----------------------------------------------------------

    def train_from_text(self, corpus_text: str, order: int, discount: float | None) -> ModelRecord:
        model_id = hashlib.sha256(
            f"{order}\x1f{discount}\x1f{corpus_text}".encode()
        ).hexdigest()[:16]
        with self.lock:
            existing = self.models.get(model_id)
            if existing is not None:
                return existing
        corpus = load_corpus(corpus_text)
        model = train(corpus, ModelConfig(order=order, discount=discount))
        record = ModelRecord(
            model_id=model_id,
            model=model,
            vocab_size=corpus_vocab_size(corpus),
            event_count=corpus.total_events(),
        )
        with self.lock:
            self.models.setdefault(model_id, record)
        return record

    def get_model(self, model_id: str) -> ModelRecord:
        record = self.models.get(model_id)
        if record is None:
            raise ApiError(404, "unknown_model", f"no model with id {model_id!r}")
        return record

    def pretrain_demo(self, orders: tuple[int, ...] = (3, 4)) -> list[ModelRecord]:
        corpus_text = dump_corpus(packaged.demo_corpus())
        return [self.train_from_text(corpus_text, order, None) for order in orders]

    # -- sessions ----------------------------------------------------------

    def create_session(self, record: ModelRecord, history, flavor: Flavor, limit: int) -> SessionRecord:
        session = GenerationSession(record.model, history, flavor, limit)
        sid = uuid.uuid4().hex
        entry = SessionRecord(
            session_id=sid,
            session=session,
            created_at=time.time(),
            order=record.model.config.order,
            flavor=flavor,
        )
        with self.lock:
            self.sessions[sid] = entry
        return entry

    def get_session(self, sid: str) -> SessionRecord:
        with self.lock:
            entry = self.sessions.get(sid)
            if entry is not None and time.time() - entry.created_at > self.session_ttl:
                del self.sessions[sid]
                raise ApiError(404, "session_expired", f"session {sid!r} has expired")
        if entry is None:
            raise ApiError(404, "unknown_session", f"no session with id {sid!r}")
        return entry


def _require(payload: dict, key: str, kind, error="bad_request"):
    value = payload.get(key)
    if not isinstance(value, kind):
        raise ApiError(400, error, f"field {key!r} must be {kind.__name__}")
    return value


def _parse_flavor(payload: dict) -> Flavor:
    raw = payload.get("flavor", "up")
    try:
        return Flavor(raw)
    except ValueError:
        raise ApiError(400, "bad_flavor", f"flavor must be 'up' or 'down', got {raw!r}") from None


def _parse_history_field(payload: dict) -> list:
    raw = payload.get("history", [])
    if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
        raise ApiError(400, "bad_history", "history must be an array of token texts")
    try:
        return parse_history(raw)
    except HelionError as exc:
        raise ApiError(400, "malformed_token", str(exc)) from None


def create_app(vocab: Vocabulary | None = None, pretrain_demo: bool = False) -> FastAPI:
    engine = ServiceEngine(vocab if vocab is not None else packaged.default_vocabulary())
    if pretrain_demo:
        engine.pretrain_demo()

    app = FastAPI(title="helion", version="0.1.0")
    app.state.engine = engine
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "error_code": "bad_request",
                "message": "invalid request body",
                "detail": {"errors": exc.errors()},
            },
        )

    @app.post("/api/train")
    async def api_train(payload: dict):
        corpus_field = _require(payload, "corpus", str)
        order = payload.get("order", 3)
        if not isinstance(order, int) or not 2 <= order <= 5:
            raise ApiError(400, "bad_order", "order must be an integer in [2, 5]")
        discount = payload.get("discount")
        if discount is not None and not (
            isinstance(discount, (int, float)) and 0 < discount < 1
        ):
            raise ApiError(400, "bad_discount", "discount must lie in (0, 1)")
        corpus_text = _resolve_corpus(corpus_field)
        try:
            record = engine.train_from_text(corpus_text, order, discount)
        except EmptyCorpus as exc:
            raise ApiError(422, "empty_corpus", str(exc)) from None
        except HelionError as exc:
            raise ApiError(400, "malformed_corpus", str(exc)) from None
        return {
            "model_id": record.model_id,
            "vocab_size": record.vocab_size,
            "event_count": record.event_count,
        }

    @app.get("/api/models")
    async def api_models():
        with engine.lock:
            records = list(engine.models.values())
        return [
            {
                "model_id": r.model_id,
                "order": r.model.config.order,
                "vocab_size": r.vocab_size,
                "event_count": r.event_count,
            }
            for r in records
        ]

    @app.post("/api/predict")
    async def api_predict(payload: dict):
        record = engine.get_model(_require(payload, "model_id", str))
        history = _parse_history_field(payload)
        flavor = _parse_flavor(payload)
        k = payload.get("k", 1)
        if not isinstance(k, int) or k < 1:
            raise ApiError(400, "bad_k", "k must be a positive integer")
        scenario = generate(record.model, history, k, flavor)
        return {
            "events": [t.text for t in scenario.events],
            "logprobs": list(scenario.per_event_logprob),
        }

    @app.post("/api/session")
    async def api_session(payload: dict):
        record = engine.get_model(_require(payload, "model_id", str))
        history = _parse_history_field(payload)
        flavor = _parse_flavor(payload)
        limit = payload.get("limit", 10)
        if not isinstance(limit, int) or limit < 1:
            raise ApiError(400, "bad_limit", "limit must be a positive integer")
        entry = engine.create_session(record, history, flavor, limit)
        return {"session_id": entry.session_id, "remaining": entry.session.remaining}

    @app.post("/api/session/{sid}/next")
    async def api_session_next(sid: str):
        entry = engine.get_session(sid)
        with engine.lock:
            try:
                token, logprob = entry.session.step()
            except SessionExhausted as exc:
                raise ApiError(409, "session_exhausted", str(exc)) from None
            remaining = entry.session.remaining
        return {"event": token.text, "logprob": logprob, "remaining": remaining}

    @app.delete("/api/session/{sid}")
    async def api_session_delete(sid: str):
        with engine.lock:
            if sid not in engine.sessions:
                raise ApiError(404, "unknown_session", f"no session with id {sid!r}")
            del engine.sessions[sid]
        return {"deleted": True}

    @app.post("/api/execute")
    async def api_execute(payload: dict):
        model_id = payload.get("model_id")
        if model_id is not None:
            engine.get_model(_require(payload, "model_id", str))
        tokens = _resolve_scenario(engine, payload.get("scenario"))
        automations = []
        if payload.get("automations") is not None:
            try:
                automations = routines_from_obj(payload["automations"], engine.vocab)
            except HelionError as exc:
                raise ApiError(400, "bad_automations", str(exc)) from None
        max_chain = payload.get("max_chain", 8)
        if not isinstance(max_chain, int) or max_chain < 0:
            raise ApiError(400, "bad_max_chain", "max_chain must be a nonnegative integer")
        with engine.lock:
            if payload.get("policies") is not None:
                try:
                    engine.platform.policies = policies_from_obj(
                        payload["policies"], engine.platform
                    )
                except HelionError as exc:
                    raise ApiError(400, "bad_policies", str(exc)) from None
            try:
                report = execute_scenario(
                    engine.platform, tokens, automations, max_chain=max_chain
                )
            except (UnknownEntity, IllegalState) as exc:
                raise ApiError(
                    422,
                    "unknown_entity" if isinstance(exc, UnknownEntity) else "illegal_state",
                    str(exc),
                    detail={
                        "token": exc.token_text,
                        "partial_report": exc.report.to_dict() if exc.report else None,
                    },
                ) from None
        return report.to_dict()

    @app.get("/api/state")
    async def api_state():
        with engine.lock:
            return snapshot(engine.platform)

    @app.get("/api/events")
    async def api_events(since: int = 0):
        with engine.lock:
            events = [e.to_dict() for e in engine.platform.bus_log if e.seq_no > since]
        return events

    return app


def _resolve_corpus(corpus_field: str) -> str:
    """Inline TSV text, or a server path when the value looks like one."""
    if "\n" not in corpus_field and "\t" not in corpus_field:
        candidate = Path(corpus_field)
        if candidate.is_file():
            return candidate.read_text(encoding="utf-8")
    return corpus_field


def _resolve_scenario(engine: ServiceEngine, scenario) -> list:
    """Scenario is a token-text array, or {"session_id"} to drain a session."""
    if isinstance(scenario, list):
        if not all(isinstance(t, str) for t in scenario):
            raise ApiError(400, "bad_scenario", "scenario must be an array of token texts")
        try:
            return parse_history(scenario)
        except (HelionError, MalformedToken) as exc:
            raise ApiError(400, "malformed_token", str(exc)) from None
    if isinstance(scenario, dict) and isinstance(scenario.get("session_id"), str):
        entry = engine.get_session(scenario["session_id"])
        tokens = []
        with engine.lock:
            while entry.session.remaining > 0:
                token, _ = entry.session.step()
                tokens.append(token)
        return tokens
    raise ApiError(400, "bad_scenario", "scenario must be a token array or {session_id}")
