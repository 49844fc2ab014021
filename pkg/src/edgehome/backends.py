"""Text-generation backends behind one narrow interface.

A backend turns a PromptDocument into reply text. The handle wrapping it
enforces the runtime contract: a context-length ceiling, one request in
flight at a time (FIFO), and honest wall-clock latency on every result.
Quantization and model internals live in the external runtime; here they
are only configuration echoed into results.
"""

import collections
import json
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

import httpx

from .errors import (
    BackendUnavailable,
    ContextOverflow,
    GenerationTimeout,
    ModelNotFound,
    OutOfMemoryBudget,
)
from .promptdoc import PromptDocument

PARAMETER_SCALES = ("0.5B", "1.5B")
QUANTIZATION_LEVELS = ("16-bit", "8-bit", "4-bit")


@dataclass(frozen=True)
class ModelDescriptor:
    name: str
    parameter_scale: str | None = None
    quantization: str | None = None

    def __post_init__(self):
        if self.parameter_scale is not None and self.parameter_scale not in PARAMETER_SCALES:
            raise ValueError(f"parameter_scale must be one of {PARAMETER_SCALES}")
        if self.quantization is not None and self.quantization not in QUANTIZATION_LEVELS:
            raise ValueError(f"quantization must be one of {QUANTIZATION_LEVELS}")

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "parameter_scale": self.parameter_scale,
            "quantization": self.quantization,
        }


@dataclass(frozen=True)
class GenerationRequest:
    prompt: PromptDocument
    max_new_tokens: int = 256
    temperature: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.max_new_tokens <= 0:
            raise ValueError("max_new_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")


@dataclass(frozen=True)
class GenerationResult:
    text: str
    latency_seconds: float
    backend_id: str
    model_descriptor: ModelDescriptor


@dataclass
class BackendConfig:
    kind: str  # "scripted" | "external"
    endpoint: str | None = None
    script_path: str | None = None
    worker_threads: int = 1
    load_timeout_seconds: float = 120.0
    max_sequence_length: int = 2048
    ram_budget_gb: float = 8.0
    expected_memory_gb: float | None = None
    temperature: float = 0.0
    max_new_tokens: int = 256
    model: ModelDescriptor = field(default_factory=lambda: ModelDescriptor("scripted"))

    def __post_init__(self):
        if self.kind not in ("scripted", "external"):
            raise ValueError(f"unknown backend kind: {self.kind!r}")
        if self.worker_threads < 1:
            raise ValueError("worker_threads must be >= 1")

    @staticmethod
    def from_json_file(path: str) -> "BackendConfig":
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        model = obj.pop("model", None)
        cfg = BackendConfig(**obj)
        if model:
            cfg.model = ModelDescriptor(**model)
        return cfg


class _FifoLock:
    """A lock that grants waiters strictly in arrival order."""

    def __init__(self):
        self._mutex = threading.Lock()
        self._waiters: collections.deque[threading.Event] = collections.deque()
        self._held = False

    def acquire(self) -> None:
        with self._mutex:
            if not self._held:
                self._held = True
                return
            gate = threading.Event()
            self._waiters.append(gate)
        gate.wait()

    def release(self) -> None:
        with self._mutex:
            if self._waiters:
                # Hand the lock straight to the next waiter.
                self._waiters.popleft().set()
            else:
                self._held = False

    def __enter__(self):
        self.acquire()
        return self

    def __exit__(self, *exc):
        self.release()


class Backend:
    """Minimal generation backend; subclasses override generate_text."""

    #: reentrant backends may serve parallel callers without serialization
    reentrant = False

    def load(self) -> None:
        pass

    def configure_threads(self, worker_threads: int) -> None:
        pass

    def generate_text(self, request: GenerationRequest) -> str:
        raise NotImplementedError


class ScriptedBackend(Backend):
    """Replies from a fixed user-text -> reply map; the replay workhorse."""

    def __init__(
        self,
        script: dict[str, str] | Callable[[PromptDocument], str],
        default: str = "",
        delay_seconds: float = 0.0,
    ):
        self._script = script
        self._default = default
        self.delay_seconds = delay_seconds

    @property
    def reentrant(self) -> bool:  # type: ignore[override]
        return self.delay_seconds == 0.0

    def generate_text(self, request: GenerationRequest) -> str:
        if self.delay_seconds:
            time.sleep(self.delay_seconds)
        if callable(self._script):
            return self._script(request.prompt)
        return self._script.get(request.prompt.user_text, self._default)

    @staticmethod
    def from_file(path: str) -> "ScriptedBackend":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except FileNotFoundError:
            raise ModelNotFound(path) from None
        return ScriptedBackend(obj.get("responses", {}), obj.get("default", ""))


class SleepStubBackend(Backend):
    """Sleeps a fixed interval per query; used to verify latency accounting."""

    def __init__(self, delay_seconds: float, response: str = "", load_seconds: float = 0.0):
        self.delay_seconds = delay_seconds
        self.load_seconds = load_seconds
        self.response = response

    def load(self) -> None:
        if self.load_seconds:
            time.sleep(self.load_seconds)

    def generate_text(self, request: GenerationRequest) -> str:
        time.sleep(self.delay_seconds)
        return self.response


class CpuBoundStubBackend(Backend):
    """Burns CPU for work_seconds / worker_threads per query.

    Models a perfectly parallel inference workload: the per-query busy-spin
    shrinks linearly as worker threads are added, independent of how many
    physical cores this host happens to expose.
    """

    def __init__(self, work_seconds: float, worker_threads: int = 1, response: str = ""):
        self.work_seconds = work_seconds
        self.worker_threads = max(1, worker_threads)
        self.response = response

    def configure_threads(self, worker_threads: int) -> None:
        self.worker_threads = max(1, worker_threads)

    def generate_text(self, request: GenerationRequest) -> str:
        deadline = time.perf_counter() + self.work_seconds / self.worker_threads
        while time.perf_counter() < deadline:
            pass
        return self.response


class ExternalBackend(Backend):
    """Client for a completion runtime speaking the minimal wire protocol:

    request  {"prompt": str, "max_new_tokens": int, "temperature": float, "seed": int?}
    response {"text": str}
    """

    def __init__(self, endpoint: str, request_timeout_seconds: float = 120.0):
        self.endpoint = endpoint
        self.request_timeout_seconds = request_timeout_seconds

    def load(self) -> None:
        # A one-token probe proves the endpoint is up and the model loaded.
        try:
            self._post("ping", max_new_tokens=1, temperature=0.0, seed=0)
        except GenerationTimeout:
            raise BackendUnavailable(f"load probe timed out: {self.endpoint}") from None

    def generate_text(self, request: GenerationRequest) -> str:
        return self._post(
            request.prompt.flatten(),
            max_new_tokens=request.max_new_tokens,
            temperature=request.temperature,
            seed=request.seed,
        )

    def _post(self, prompt: str, max_new_tokens: int, temperature: float, seed: int | None) -> str:
        payload: dict = {
            "prompt": prompt,
            "max_new_tokens": max_new_tokens,
            "temperature": temperature,
        }
        if seed is not None:
            payload["seed"] = seed
        try:
            response = httpx.post(
                self.endpoint, json=payload, timeout=self.request_timeout_seconds
            )
        except httpx.TimeoutException:
            raise GenerationTimeout(f"no reply within {self.request_timeout_seconds}s") from None
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"{self.endpoint}: {exc}") from None
        if response.status_code == 404:
            raise ModelNotFound(self.endpoint)
        if response.status_code != 200:
            raise BackendUnavailable(f"{self.endpoint} returned {response.status_code}")
        try:
            text = response.json()["text"]
        except (KeyError, ValueError):
            raise BackendUnavailable("malformed completion response") from None
        if not isinstance(text, str):
            raise BackendUnavailable("completion `text` is not a string")
        return text


class BackendHandle:
    """A loaded backend plus its runtime contract enforcement."""

    def __init__(self, backend: Backend, config: BackendConfig, load_time_seconds: float):
        self.backend = backend
        self.config = config
        self.load_time_seconds = load_time_seconds
        self.backend_id = f"{config.kind}:{config.model.name}"
        self._flight = _FifoLock()
        backend.configure_threads(config.worker_threads)

    @property
    def descriptor(self) -> ModelDescriptor:
        return self.config.model

    @property
    def reentrant(self) -> bool:
        return self.backend.reentrant

    def configure_threads(self, worker_threads: int) -> None:
        self.config.worker_threads = max(1, worker_threads)
        self.backend.configure_threads(self.config.worker_threads)

    def generate(self, request: GenerationRequest) -> GenerationResult:
        prompt_tokens = len(request.prompt.flatten().split())
        if prompt_tokens > self.config.max_sequence_length:
            raise ContextOverflow(
                f"prompt is {prompt_tokens} tokens, limit {self.config.max_sequence_length}"
            )
        if self.backend.reentrant:
            started = time.perf_counter()
            text = self.backend.generate_text(request)
            latency = time.perf_counter() - started
        else:
            with self._flight:
                started = time.perf_counter()
                text = self.backend.generate_text(request)
                latency = time.perf_counter() - started
        return GenerationResult(text, latency, self.backend_id, self.descriptor)


def load_backend(config: BackendConfig, backend: Backend | None = None) -> BackendHandle:
    """Construct and load a backend, measuring load time separately.

    An explicit `backend` overrides construction from config (used for stubs).
    Raises ModelNotFound for a missing script/model and OutOfMemoryBudget when
    the configured expected footprint exceeds the RAM budget.
    """
    if config.expected_memory_gb is not None and config.expected_memory_gb > config.ram_budget_gb:
        raise OutOfMemoryBudget(
            f"model needs {config.expected_memory_gb} GB, budget {config.ram_budget_gb} GB"
        )
    if backend is None:
        if config.kind == "scripted":
            if not config.script_path:
                raise ModelNotFound("scripted backend needs script_path")
            backend = ScriptedBackend.from_file(config.script_path)
        else:
            if not config.endpoint:
                raise ModelNotFound("external backend needs endpoint")
            backend = ExternalBackend(config.endpoint, config.load_timeout_seconds)
    started = time.perf_counter()
    backend.load()
    load_time = time.perf_counter() - started
    return BackendHandle(backend, config, load_time)
