"""Evaluation pipelines: exact-match accuracy, corruption drills, latency.

All systems under test are driven through the same total parse of assistant
text, so a templated classifier and a generative backend are graded by one
set of rules. Accuracy is exact equality of canonical (service, device)
against gold; everything else lands in exactly one error class.
"""

import json
import random
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import cycle, islice

from .actions import (
    CLOSE_FENCE,
    MISSING_FIELD,
    OK,
    OPEN_FENCE,
    PARSE_ERROR_KINDS,
    parse_assistant_output,
)
from .backends import BackendHandle, GenerationRequest
from .baseline import BaselinePrediction, LinearOvrModel, TfidfVectorizer, predict
from .dataset import ConversationSample
from .promptdoc import ChatTurn, PromptDocument
from .similarity import EmbeddingTable, score_semantic_similarity, summarize_scores

WRONG_SERVICE = "WrongService"
WRONG_DEVICE = "WrongDevice"

# Every graded sample is either correct or in exactly one of these buckets.
ERROR_CLASSES: tuple[str, ...] = tuple(
    kind for kind in PARSE_ERROR_KINDS if kind != OK
) + (WRONG_SERVICE, WRONG_DEVICE)

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SampleResult:
    index: int
    kind: str  # "Ok" or an error class
    correct: bool
    predicted_service: str | None
    predicted_device: str | None
    response_text: str
    latency_seconds: float


@dataclass
class EvalOutcome:
    results: list[SampleResult]
    correct: int
    error_counts: dict[str, int]

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def accuracy(self) -> float:
        return self.correct / self.total


def backend_driver(
    handle: BackendHandle,
    temperature: float = 0.0,
    max_new_tokens: int = 256,
    seed: int | None = None,
):
    """Driver that feeds the stored conversation text to a backend."""

    def run(sample: ConversationSample) -> tuple[str, float]:
        prompt = PromptDocument(
            (ChatTurn("system", sample.system_text), ChatTurn("user", sample.user_text))
        )
        result = handle.generate(
            GenerationRequest(prompt, max_new_tokens, temperature, seed)
        )
        return result.text, result.latency_seconds

    return run


def baseline_driver(model: LinearOvrModel, vectorizer: TfidfVectorizer):
    """Driver that wraps classifier output in the shared assistant format."""

    def run(sample: ConversationSample) -> tuple[str, float]:
        started = time.perf_counter()
        prediction: BaselinePrediction = predict(
            sample.user_text, model, vectorizer, sample.context().registry
        )
        text = prediction.to_assistant_text()
        return text, time.perf_counter() - started

    return run


def grade(sample: ConversationSample, index: int, text: str, latency: float) -> SampleResult:
    context = sample.context()
    parsed = parse_assistant_output(text, context.catalog, context.registry)
    if not parsed.outcome.ok:
        return SampleResult(index, parsed.outcome.kind, False, None, None,
                            parsed.response_text, latency)
    service = parsed.action.service.canonical
    device = parsed.action.target_device.canonical
    if service != sample.gold_service:
        kind, correct = WRONG_SERVICE, False
    elif device != sample.gold_device:
        kind, correct = WRONG_DEVICE, False
    else:
        kind, correct = OK, True
    return SampleResult(index, kind, correct, service, device,
                        parsed.response_text, latency)


def evaluate_slot_intent(driver, samples: list[ConversationSample], workers: int = 1) -> EvalOutcome:
    """Run the driver over every sample and grade against gold.

    `workers > 1` fans out over threads; only use it with reentrant drivers.
    """
    if not samples:
        raise ValueError("no samples to evaluate")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(driver, samples))
    else:
        outputs = [driver(sample) for sample in samples]
    results = [
        grade(sample, i, text, latency)
        for i, (sample, (text, latency)) in enumerate(zip(samples, outputs))
    ]
    counts = {name: 0 for name in ERROR_CLASSES}
    correct = 0
    for result in results:
        if result.correct:
            correct += 1
        else:
            counts[result.kind] += 1
    return EvalOutcome(results, correct, counts)


def replay_script(samples: list[ConversationSample]) -> dict[str, str]:
    """user text -> gold assistant text, for scripted replay backends."""
    return {sample.user_text: sample.assistant_text for sample in samples}


# --- controlled corruption ---------------------------------------------------

DROP_FENCE = "drop_fence"
DELETE_BRACE = "delete_brace"
RENAME_DEVICE = "rename_device"
SWAP_DOMAIN = "swap_domain"
REMOVE_SERVICE = "remove_service"

CORRUPTION_EXPECTED_CLASS: dict[str, str] = {
    DROP_FENCE: "NoActionBlock",
    DELETE_BRACE: "MalformedJson",
    RENAME_DEVICE: "UnknownDevice",
    SWAP_DOMAIN: "DomainMismatch",
    REMOVE_SERVICE: "MissingField",
}


def _rewrite_block(text: str, mutate) -> str:
    """Apply `mutate(obj)` to the JSON of the first action block."""
    head, _, rest = text.partition(OPEN_FENCE + "\n")
    body, _, tail = rest.partition("\n" + CLOSE_FENCE)
    obj = json.loads(body)
    mutate(obj)
    return head + OPEN_FENCE + "\n" + json.dumps(obj) + "\n" + CLOSE_FENCE + tail


def corrupt_text(text: str, kind: str, sample: ConversationSample) -> str:
    if kind == DROP_FENCE:
        head, sep, _ = text.rpartition("\n" + CLOSE_FENCE)
        return head if sep else text
    if kind == DELETE_BRACE:
        return text.replace("{", "", 1)
    if kind == RENAME_DEVICE:
        def rename(obj):
            key = "target_device" if "target_device" in obj else "device"
            obj[key] = obj[key] + "_zz"
        return _rewrite_block(text, rename)
    if kind == SWAP_DOMAIN:
        domain = sample.gold_device.split(".", 1)[0]
        foreign = next(
            sig.canonical
            for sig in sorted(sample.context().catalog, key=lambda s: s.canonical)
            if sig.domain != domain
        )
        def swap(obj):
            obj["service"] = foreign
        return _rewrite_block(text, swap)
    if kind == REMOVE_SERVICE:
        def strip(obj):
            obj.pop("service", None)
        return _rewrite_block(text, strip)
    raise ValueError(f"unknown corruption kind: {kind!r}")


@dataclass
class CorruptionPlan:
    kinds_by_index: dict[int, str]
    expected_error_counts: dict[str, int]

    @property
    def injected(self) -> int:
        return len(self.kinds_by_index)


class CorruptionInjector:
    """Deterministically corrupts a fraction of driver outputs.

    The plan is fixed up front from (seed, rate, sample count), so the
    expected per-error-class counts are known exactly before the run.
    """

    def __init__(self, rate: float, seed: int = 0, kinds: tuple[str, ...] = tuple(CORRUPTION_EXPECTED_CLASS)):
        if not 0 <= rate <= 1:
            raise ValueError("rate must be within [0, 1]")
        for kind in kinds:
            if kind not in CORRUPTION_EXPECTED_CLASS:
                raise ValueError(f"unknown corruption kind: {kind!r}")
        self.rate = rate
        self.seed = seed
        self.kinds = kinds

    def plan(self, count: int) -> CorruptionPlan:
        rng = random.Random(self.seed)
        kinds_by_index: dict[int, str] = {}
        expected = {name: 0 for name in ERROR_CLASSES}
        for index in range(count):
            hit = rng.random() < self.rate
            kind = rng.choice(self.kinds)  # drawn unconditionally, keeps plans aligned
            if hit:
                kinds_by_index[index] = kind
                expected[CORRUPTION_EXPECTED_CLASS[kind]] += 1
        return CorruptionPlan(kinds_by_index, expected)


def corrupted_driver(driver, samples: list[ConversationSample], plan: CorruptionPlan):
    by_identity = {id(sample): plan.kinds_by_index.get(i) for i, sample in enumerate(samples)}

    def run(sample: ConversationSample) -> tuple[str, float]:
        text, latency = driver(sample)
        kind = by_identity.get(id(sample))
        if kind is not None:
            text = corrupt_text(text, kind, sample)
        return text, latency

    return run


# --- latency -----------------------------------------------------------------


@dataclass(frozen=True)
class LatencySummary:
    mean_seconds: float
    std_seconds: float
    sample_count: int
    worker_threads: int
    load_time_seconds: float

    def to_json_obj(self) -> dict:
        return {
            "mean_seconds": self.mean_seconds,
            "std_seconds": self.std_seconds,
            "sample_count": self.sample_count,
            "worker_threads": self.worker_threads,
            "load_time_seconds": self.load_time_seconds,
        }


def benchmark_latency(
    handle: BackendHandle,
    samples: list[ConversationSample],
    sample_count: int,
    warmup: int = 3,
    temperature: float = 0.0,
    max_new_tokens: int = 256,
) -> LatencySummary:
    """Sequential single-caller timing over `sample_count` queries."""
    if sample_count <= 0:
        raise ValueError("sample_count must be positive")
    if not samples:
        raise ValueError("no samples to draw queries from")
    queries = list(islice(cycle(samples), warmup + sample_count))
    latencies = []
    for i, sample in enumerate(queries):
        prompt = PromptDocument(
            (ChatTurn("system", sample.system_text), ChatTurn("user", sample.user_text))
        )
        result = handle.generate(GenerationRequest(prompt, max_new_tokens, temperature))
        if i >= warmup:
            latencies.append(result.latency_seconds)
    return LatencySummary(
        mean_seconds=statistics.fmean(latencies),
        std_seconds=statistics.pstdev(latencies) if len(latencies) > 1 else 0.0,
        sample_count=sample_count,
        worker_threads=handle.config.worker_threads,
        load_time_seconds=handle.load_time_seconds,
    )


# --- reporting ---------------------------------------------------------------


def score_responses(
    results: list[SampleResult],
    samples: list[ConversationSample],
    table: EmbeddingTable | None = None,
) -> dict:
    """Similarity of produced prose vs gold prose; empty sides are skipped."""
    f1s = []
    for result in results:
        gold = samples[result.index].gold_response
        if not result.response_text.strip() or not gold.strip():
            continue
        f1s.append(score_semantic_similarity(result.response_text, gold, table).f1)
    return summarize_scores(f1s)


@dataclass
class MetricsReport:
    model_name: str
    sample_count: int
    correct: int
    error_counts: dict[str, int]
    decoding: dict
    parameter_scale: str | None = None
    quantization: str | None = None
    backend_id: str | None = None
    split_fingerprint: str | None = None
    similarity: dict | None = None
    latency: dict | None = None
    schema_version: int = REPORT_SCHEMA_VERSION

    def __post_init__(self):
        if self.sample_count <= 0:
            raise ValueError("sample_count must be positive")
        if self.correct + sum(self.error_counts.values()) != self.sample_count:
            raise ValueError("correct + errors must equal sample_count")

    @property
    def accuracy(self) -> float:
        return self.correct / self.sample_count

    @property
    def display_name(self) -> str:
        if self.quantization:
            return f"{self.model_name} ({self.quantization})"
        return self.model_name

    def to_json_obj(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "model": {
                "name": self.model_name,
                "parameter_scale": self.parameter_scale,
                "quantization": self.quantization,
            },
            "backend_id": self.backend_id,
            "decoding": self.decoding,
            "dataset": {
                "sample_count": self.sample_count,
                "split_fingerprint": self.split_fingerprint,
            },
            "accuracy": {
                "exact_match": self.accuracy,
                "correct": self.correct,
                "errors": dict(self.error_counts),
            },
            "similarity": self.similarity,
            "latency": self.latency,
        }


def build_report(
    outcome: EvalOutcome,
    model_name: str,
    decoding: dict | None = None,
    **extra,
) -> MetricsReport:
    return MetricsReport(
        model_name=model_name,
        sample_count=outcome.total,
        correct=outcome.correct,
        error_counts=dict(outcome.error_counts),
        decoding=decoding or {},
        **extra,
    )


def report_from_json_obj(obj: dict) -> MetricsReport:
    return MetricsReport(
        model_name=obj["model"]["name"],
        parameter_scale=obj["model"].get("parameter_scale"),
        quantization=obj["model"].get("quantization"),
        backend_id=obj.get("backend_id"),
        decoding=obj.get("decoding", {}),
        sample_count=obj["dataset"]["sample_count"],
        split_fingerprint=obj["dataset"].get("split_fingerprint"),
        correct=obj["accuracy"]["correct"],
        error_counts=dict(obj["accuracy"]["errors"]),
        similarity=obj.get("similarity"),
        latency=obj.get("latency"),
        schema_version=obj.get("schema_version", REPORT_SCHEMA_VERSION),
    )


def emit_json(report: MetricsReport) -> str:
    return json.dumps(report.to_json_obj(), indent=2, sort_keys=True) + "\n"


def emit_markdown(reports: list[MetricsReport]) -> str:
    """Comparison table; rows without similarity render `---` in that cell."""
    lines = ["| Model | Accuracy | BERTScore |", "| --- | --- | --- |"]
    for report in reports:
        if report.similarity and report.similarity.get("count", 0) > 0:
            similarity = f"{report.similarity['mean']:.2f}"
        else:
            similarity = "---"
        lines.append(
            f"| {report.display_name} | {100 * report.accuracy:.1f}% | {similarity} |"
        )
    return "\n".join(lines) + "\n"


def regression_check(current: MetricsReport, baseline: MetricsReport) -> list[str]:
    """Error classes whose rate rose beyond a hair above the baseline run."""
    problems = []
    for name in ERROR_CLASSES:
        now = current.error_counts.get(name, 0) / current.sample_count
        then = baseline.error_counts.get(name, 0) / baseline.sample_count
        if now > then + 1e-9:
            problems.append(
                f"{name}: {now:.4f} vs baseline {then:.4f}"
            )
    return problems
