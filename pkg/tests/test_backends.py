import json
import threading
import time
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from edgehome.backends import (
    Backend,
    BackendConfig,
    BackendHandle,
    CpuBoundStubBackend,
    ExternalBackend,
    GenerationRequest,
    ModelDescriptor,
    ScriptedBackend,
    SleepStubBackend,
    load_backend,
)
from edgehome.errors import (
    BackendUnavailable,
    ContextOverflow,
    GenerationTimeout,
    ModelNotFound,
    OutOfMemoryBudget,
)
from edgehome.promptdoc import ChatTurn, PromptDocument


def _doc(user_text: str) -> PromptDocument:
    return PromptDocument((ChatTurn("system", "ctx"), ChatTurn("user", user_text)))


def _handle(backend: Backend, **config_overrides) -> BackendHandle:
    config = BackendConfig(kind="scripted", **config_overrides)
    return load_backend(config, backend=backend)


def test_scripted_backend_is_a_pure_map():
    backend = ScriptedBackend({"hi": "hello back"}, default="nope")
    handle = _handle(backend)
    req = GenerationRequest(_doc("hi"))
    assert handle.generate(req).text == "hello back"
    assert handle.generate(req).text == "hello back"
    assert handle.generate(GenerationRequest(_doc("unknown"))).text == "nope"


def test_scripted_backend_callable_script():
    backend = ScriptedBackend(lambda doc: doc.user_text.upper())
    handle = _handle(backend)
    assert handle.generate(GenerationRequest(_doc("loud"))).text == "LOUD"


def test_generation_request_validation():
    with pytest.raises(ValueError):
        GenerationRequest(_doc("x"), max_new_tokens=0)
    with pytest.raises(ValueError):
        GenerationRequest(_doc("x"), temperature=-0.5)


def test_model_descriptor_vocabulary():
    ModelDescriptor("m", "0.5B", "8-bit")
    with pytest.raises(ValueError):
        ModelDescriptor("m", "0.7B")
    with pytest.raises(ValueError):
        ModelDescriptor("m", quantization="2-bit")


def test_latency_measurement_honesty():
    delay = 0.05
    handle = _handle(SleepStubBackend(delay))
    for _ in range(10):
        result = handle.generate(GenerationRequest(_doc("x")))
        assert delay <= result.latency_seconds <= delay + 0.02


def test_fifo_serialization_total_time():
    n, delay = 4, 0.1
    handle = _handle(SleepStubBackend(delay))
    started = time.perf_counter()
    threads = [
        threading.Thread(target=lambda: handle.generate(GenerationRequest(_doc("x"))))
        for _ in range(n)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    elapsed = time.perf_counter() - started
    assert n * delay <= elapsed <= n * delay + 0.2


def test_context_overflow():
    handle = _handle(ScriptedBackend({}), max_sequence_length=64)
    long_user = "word " * 200
    with pytest.raises(ContextOverflow):
        handle.generate(GenerationRequest(_doc(long_user)))


def test_load_time_measured_separately():
    handle = _handle(SleepStubBackend(0.0, load_seconds=3.2))
    assert 3.0 <= handle.load_time_seconds <= 3.4
    result = handle.generate(GenerationRequest(_doc("x")))
    assert result.latency_seconds < 0.1  # load cost never leaks into queries


def test_out_of_memory_budget():
    config = BackendConfig(kind="scripted", expected_memory_gb=9.5, ram_budget_gb=8.0)
    with pytest.raises(OutOfMemoryBudget):
        load_backend(config, backend=ScriptedBackend({}))


def test_scripted_missing_file():
    config = BackendConfig(kind="scripted", script_path="/nonexistent/script.json")
    with pytest.raises(ModelNotFound):
        load_backend(config)


def test_scripted_backend_from_file(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(json.dumps({"responses": {"hi": "yo"}, "default": "?"}))
    handle = load_backend(BackendConfig(kind="scripted", script_path=str(path)))
    assert handle.generate(GenerationRequest(_doc("hi"))).text == "yo"
    assert handle.generate(GenerationRequest(_doc("bye"))).text == "?"


def test_backend_config_from_json_file(tmp_path):
    path = tmp_path / "backend.json"
    path.write_text(json.dumps({
        "kind": "external",
        "endpoint": "http://127.0.0.1:9",
        "worker_threads": 2,
        "model": {"name": "tiny", "parameter_scale": "0.5B", "quantization": "4-bit"},
    }))
    config = BackendConfig.from_json_file(str(path))
    assert config.kind == "external"
    assert config.worker_threads == 2
    assert config.model.quantization == "4-bit"


def test_config_validation():
    with pytest.raises(ValueError):
        BackendConfig(kind="quantum")
    with pytest.raises(ValueError):
        BackendConfig(kind="scripted", worker_threads=0)


def test_cpu_bound_stub_scales_with_threads():
    stub = CpuBoundStubBackend(work_seconds=0.2)
    handle = _handle(stub, worker_threads=1)
    t1 = handle.generate(GenerationRequest(_doc("x"))).latency_seconds
    handle.configure_threads(2)
    t2 = handle.generate(GenerationRequest(_doc("x"))).latency_seconds
    assert 1.5 <= t1 / t2 <= 2.5


def test_result_carries_descriptor_and_backend_id():
    config = BackendConfig(
        kind="scripted", model=ModelDescriptor("replay", None, None)
    )
    handle = load_backend(config, backend=ScriptedBackend({}))
    result = handle.generate(GenerationRequest(_doc("x")))
    assert result.backend_id == "scripted:replay"
    assert result.model_descriptor.name == "replay"


class _RuntimeHandler(BaseHTTPRequestHandler):
    behavior = "ok"

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        if self.behavior == "slow":
            time.sleep(0.5)
        if self.behavior == "missing":
            self.send_response(404)
            self.end_headers()
            return
        payload = json.dumps({"text": f"echo:{body.get('prompt', '')[-20:]}"})
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(payload.encode())

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_runtime():
    server = HTTPServer(("127.0.0.1", 0), _RuntimeHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _RuntimeHandler.behavior = "ok"
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_external_backend_round_trip(stub_runtime):
    handle = load_backend(BackendConfig(kind="external", endpoint=stub_runtime))
    assert handle.load_time_seconds > 0
    result = handle.generate(GenerationRequest(_doc("turn it on")))
    assert result.text.startswith("echo:")


def test_external_backend_unavailable():
    backend = ExternalBackend("http://127.0.0.1:1/completions")
    with pytest.raises(BackendUnavailable):
        backend.generate_text(GenerationRequest(_doc("x")))


def test_external_backend_timeout(stub_runtime):
    _RuntimeHandler.behavior = "slow"
    backend = ExternalBackend(stub_runtime, request_timeout_seconds=0.1)
    with pytest.raises(GenerationTimeout):
        backend.generate_text(GenerationRequest(_doc("x")))


def test_external_backend_missing_model(stub_runtime):
    _RuntimeHandler.behavior = "missing"
    backend = ExternalBackend(stub_runtime)
    with pytest.raises(ModelNotFound):
        backend.generate_text(GenerationRequest(_doc("x")))
