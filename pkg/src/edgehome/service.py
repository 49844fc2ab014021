"""HTTP assistant service: prompt rendering, generation, action execution.

Each session owns an isolated simulated home. A chat turn renders a fresh
two-turn prompt from live device state, generates, parses, and either
executes the action or answers with the templated fallback, leaving state
untouched. History is kept for the UI but never fed back to the model.
"""

import json
import threading
import time
import uuid
from dataclasses import dataclass, field as dataclass_field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .actions import AssistantOutput, ParseOutcome, parse_assistant_output
from .backends import BackendHandle, GenerationRequest
from .defaults import DEFAULT_PREAMBLE, FALLBACK_TEXT, default_catalog, default_home
from .errors import (
    BackendUnavailable,
    EdgeHomeError,
    EmptyUtterance,
    GenerationTimeout,
    InvalidHomeConfig,
    UnknownSession,
)
from .model import (
    Device,
    DeviceRegistry,
    DeviceState,
    ServiceCatalog,
    ServiceSignature,
    parse_entity_id,
)
from .promptdoc import SystemContext, parse_system_prompt, render_chat
from .simulator import ExecutionRecord, HomeSimulator


@dataclass
class Session:
    session_id: str
    simulator: HomeSimulator
    preamble: str
    history: list = dataclass_field(default_factory=list)
    created_at: float = dataclass_field(default_factory=time.time)
    lock: threading.Lock = dataclass_field(default_factory=threading.Lock)


def _device_snapshot(device: Device) -> dict:
    return {
        "entity_id": device.id.canonical,
        "name": device.friendly_name,
        "state": device.state.primary_state,
        "attributes": dict(device.state.attributes),
    }


def _build_explicit_context(config: dict) -> SystemContext:
    devices = config.get("devices")
    if not isinstance(devices, list) or not devices:
        raise InvalidHomeConfig("home config needs a non-empty `devices` array")
    registry = DeviceRegistry()
    for i, entry in enumerate(devices):
        if not isinstance(entry, dict):
            raise InvalidHomeConfig(f"devices[{i}] is not an object")
        try:
            entity = parse_entity_id(str(entry.get("entity_id", "")))
            state = DeviceState(
                str(entry.get("state", "")), dict(entry.get("attributes") or {})
            )
            registry.add(Device(entity, str(entry.get("name", "")), state))
        except EdgeHomeError as exc:
            raise InvalidHomeConfig(f"devices[{i}]: {exc.message}") from None
    raw_services = config.get("services")
    if raw_services is None:
        catalog = default_catalog()
    else:
        if not isinstance(raw_services, list) or not raw_services:
            raise InvalidHomeConfig("`services` must be a non-empty array when given")
        catalog = ServiceCatalog()
        for i, text in enumerate(raw_services):
            spelled = str(text).strip()
            if "(" not in spelled:
                spelled += "()"  # accept bare names in explicit configs
            try:
                catalog.add(ServiceSignature.parse(spelled))
            except (EdgeHomeError, ValueError) as exc:
                raise InvalidHomeConfig(f"services[{i}]: {exc}") from None
    return SystemContext(catalog, registry)


def build_home_context(config: object) -> SystemContext:
    """Home config -> (catalog, registry); omitted config is the default home."""
    if config is None or config == {}:
        return SystemContext(default_catalog(), default_home())
    if not isinstance(config, dict):
        raise InvalidHomeConfig("home config must be a JSON object")
    prompt = config.get("system_prompt")
    if prompt is not None:
        if not isinstance(prompt, str):
            raise InvalidHomeConfig("`system_prompt` must be a string")
        try:
            return parse_system_prompt(prompt)
        except EdgeHomeError as exc:
            raise InvalidHomeConfig(f"{exc.error_class}: {exc.message}") from None
    return _build_explicit_context(config)


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, session: Session) -> None:
        with self._lock:
            self._sessions[session.session_id] = session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(session_id)
        return session

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)


def _status_for(exc: EdgeHomeError) -> int:
    if isinstance(exc, UnknownSession):
        return 404
    if isinstance(exc, (BackendUnavailable, GenerationTimeout)):
        return 503
    return 400


def _error_body(error_class: str, message: str) -> dict:
    return {"error": {"class": error_class, "message": message}}


async def _read_json(request: Request) -> object:
    body = await request.body()
    if not body:
        return None
    try:
        return json.loads(body)
    except ValueError:
        raise RequestValidationError([{"msg": "body is not valid JSON"}]) from None


def create_app(
    handle: BackendHandle,
    *,
    temperature: float = 0.0,
    max_new_tokens: int = 256,
    preamble: str = DEFAULT_PREAMBLE,
) -> FastAPI:
    app = FastAPI(title="edgehome assistant", docs_url=None, redoc_url=None)
    store = SessionStore()
    app.state.sessions = store
    app.state.handle = handle

    @app.exception_handler(EdgeHomeError)
    async def on_domain_error(request: Request, exc: EdgeHomeError):
        return JSONResponse(_error_body(exc.error_class, exc.message), _status_for(exc))

    @app.exception_handler(RequestValidationError)
    async def on_bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(_error_body("InvalidRequest", str(exc.errors()[:1])), 400)

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "model": handle.descriptor.to_json_obj()}

    @app.get("/config")
    async def config():
        return {
            "model": handle.descriptor.to_json_obj(),
            "backend_kind": handle.config.kind,
            "backend_id": handle.backend_id,
            "worker_threads": handle.config.worker_threads,
            "max_sequence_length": handle.config.max_sequence_length,
            "load_time_seconds": handle.load_time_seconds,
        }

    @app.post("/sessions")
    async def create_session(request: Request):
        config_obj = await _read_json(request)
        context = build_home_context(config_obj)
        session = Session(
            session_id=uuid.uuid4().hex,
            simulator=HomeSimulator(context.catalog, context.registry.copy()),
            preamble=preamble,
        )
        store.create(session)
        devices = [_device_snapshot(d) for d in session.simulator.snapshot()]
        return JSONResponse({"session_id": session.session_id, "devices": devices}, 201)

    @app.get("/sessions/{session_id}/devices")
    async def get_devices(session_id: str):
        session = store.get(session_id)
        return {"devices": [_device_snapshot(d) for d in session.simulator.snapshot()]}

    @app.get("/sessions/{session_id}/events")
    async def get_events(session_id: str, cursor: int = 0):
        session = store.get(session_id)
        records, new_cursor = session.simulator.events_since(max(0, cursor))
        return {"events": [r.to_json_obj() for r in records], "cursor": new_cursor}

    @app.post("/sessions/{session_id}/chat")
    async def chat(session_id: str, request: Request):
        session = store.get(session_id)
        body = await _read_json(request)
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            raise RequestValidationError([{"msg": "body must be {\"text\": string}"}])
        text = body["text"]
        if not text.strip():
            raise EmptyUtterance("chat text is empty")
        with session.lock:
            return _run_chat(session, text, handle, temperature, max_new_tokens)

    def _run_chat(session, text, handle, temperature, max_new_tokens):
        simulator = session.simulator
        context = SystemContext(simulator.catalog, simulator.registry, session.preamble)
        prompt = render_chat(context, text)
        result = handle.generate(GenerationRequest(prompt, max_new_tokens, temperature))
        parsed = parse_assistant_output(result.text, simulator.catalog, simulator.registry)
        record: ExecutionRecord | None = None
        if parsed.outcome.ok:
            try:
                record = simulator.execute(parsed.action)
            except EdgeHomeError as exc:
                parsed = AssistantOutput(
                    parsed.response_text, None,
                    ParseOutcome(exc.error_class, exc.message),
                    parsed.extra_blocks,
                )
        session.history.append((text, parsed, record))
        payload = {
            "latency_seconds": result.latency_seconds,
            "model": handle.descriptor.to_json_obj(),
            "events_cursor": simulator.event_count(),
        }
        if record is not None:
            payload.update(
                response_text=parsed.response_text,
                outcome="Ok",
                action={
                    "service": record.action.service.canonical,
                    "target_device": record.action.target_device.canonical,
                    "params": dict(record.action.params),
                },
                new_state={
                    "state": record.new_state.primary_state,
                    "attributes": dict(record.new_state.attributes),
                },
            )
        else:
            payload.update(
                response_text=FALLBACK_TEXT, outcome="Fallback", reason=parsed.outcome.kind
            )
        return payload

    return app
