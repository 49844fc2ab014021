"""Conversation datasets: loading, stratified splitting, and export.

A dataset file is a JSON array of records (JSON-lines also accepted), each
record an array of `{"from": ..., "value": ...}` turns containing one system,
one user, and one assistant turn. Records that cannot be fully interpreted
are quarantined with a reason rather than silently dropped.
"""

import hashlib
import json
import random
from dataclasses import dataclass, field

from .actions import parse_assistant_output
from .errors import InsufficientClassSize, UnreadableFile, UnwritableFile
from .promptdoc import SystemContext, parse_system_prompt

# Per-class sizes and test counts of the reference split shipped with the
# public corpus this pipeline targets; the test counts sum to 2,435.
REFERENCE_CLASS_SIZES: dict[str, int] = {
    "climate.set_fan_mode": 1080, "climate.set_humidity": 1080,
    "climate.set_hvac_mode": 1080, "climate.set_temperature": 1000,
    "cover.close": 385, "cover.open": 395, "cover.stop": 320, "cover.toggle": 365,
    "fan.decrease_speed": 360, "fan.increase_speed": 300, "fan.toggle": 390,
    "fan.turn_off": 390, "fan.turn_on": 405,
    "light.toggle": 450, "light.turn_off": 2535, "light.turn_on": 11940,
    "lock.lock": 200, "lock.unlock": 185,
    "media_player.media_next_track": 55, "media_player.media_pause": 55,
    "media_player.media_play": 70, "media_player.media_previous_track": 55,
    "media_player.media_stop": 55, "media_player.turn_off": 25,
    "media_player.turn_on": 40, "media_player.volume_down": 65,
    "media_player.volume_mute": 60, "media_player.volume_up": 85,
    "switch.toggle": 250, "switch.turn_off": 500, "switch.turn_on": 540,
    "timer.cancel": 600, "timer.start": 600, "todo.add_item": 1560,
    "vacuum.pause": 15, "vacuum.return_to_base": 150, "vacuum.start": 370,
    "vacuum.stop": 15,
}

REFERENCE_TEST_COUNTS: dict[str, int] = {
    "climate.set_fan_mode": 0, "climate.set_humidity": 0,
    "climate.set_hvac_mode": 0, "climate.set_temperature": 0,
    "cover.close": 35, "cover.open": 40, "cover.stop": 25, "cover.toggle": 25,
    "fan.decrease_speed": 60, "fan.increase_speed": 40, "fan.toggle": 85,
    "fan.turn_off": 70, "fan.turn_on": 60,
    "light.toggle": 90, "light.turn_off": 600, "light.turn_on": 150,
    "lock.lock": 125, "lock.unlock": 125,
    "media_player.media_next_track": 25, "media_player.media_pause": 25,
    "media_player.media_play": 25, "media_player.media_previous_track": 25,
    "media_player.media_stop": 25, "media_player.turn_off": 25,
    "media_player.turn_on": 40, "media_player.volume_down": 35,
    "media_player.volume_mute": 30, "media_player.volume_up": 40,
    "switch.toggle": 50, "switch.turn_off": 175, "switch.turn_on": 165,
    "timer.cancel": 0, "timer.start": 0, "todo.add_item": 0,
    "vacuum.pause": 0, "vacuum.return_to_base": 0, "vacuum.start": 220,
    "vacuum.stop": 0,
}


@dataclass
class ConversationSample:
    """One single-turn exchange with its parsed gold action."""

    system_text: str
    user_text: str
    assistant_text: str
    gold_response: str
    gold_service: str
    gold_device: str
    gold_params: dict[str, float | str]
    class_label: str
    multi_action: bool = False
    _context: SystemContext | None = field(default=None, compare=False, repr=False)

    def context(self) -> SystemContext:
        if self._context is None:
            self._context = parse_system_prompt(self.system_text)
        return self._context

    def to_record(self) -> list[dict]:
        return [
            {"from": "system", "value": self.system_text},
            {"from": "user", "value": self.user_text},
            {"from": "assistant", "value": self.assistant_text},
        ]


@dataclass(frozen=True)
class QuarantinedRecord:
    index: int
    reason: str


@dataclass
class LoadResult:
    samples: list[ConversationSample]
    quarantined: list[QuarantinedRecord]
    multi_action_count: int = 0


def _turn_value(record: list, speaker: str) -> str | None:
    for turn in record:
        if isinstance(turn, dict) and turn.get("from") == speaker:
            value = turn.get("value")
            return value if isinstance(value, str) else None
    return None


def sample_from_record(record: object, index: int = -1) -> ConversationSample:
    """Interpret one raw record; raises on any schema or parse problem."""
    if not isinstance(record, list) or not all(isinstance(t, dict) for t in record):
        raise SchemaProblem(f"record {index}: not an array of turn objects")
    system_text = _turn_value(record, "system")
    user_text = _turn_value(record, "user")
    assistant_text = _turn_value(record, "assistant")
    for speaker, value in (("system", system_text), ("user", user_text), ("assistant", assistant_text)):
        if value is None:
            raise SchemaProblem(f"record {index}: missing {speaker} turn")
    if not user_text.strip():
        raise SchemaProblem(f"record {index}: empty user turn")
    context = parse_system_prompt(system_text)
    parsed = parse_assistant_output(assistant_text, context.catalog, context.registry)
    if not parsed.outcome.ok:
        raise SchemaProblem(
            f"record {index}: gold reply unusable ({parsed.outcome.kind}: {parsed.outcome.detail})"
        )
    return ConversationSample(
        system_text=system_text,
        user_text=user_text,
        assistant_text=assistant_text,
        gold_response=parsed.response_text,
        gold_service=parsed.action.service.canonical,
        gold_device=parsed.action.target_device.canonical,
        gold_params=dict(parsed.action.params),
        class_label=parsed.action.service.canonical,
        multi_action=parsed.extra_blocks > 0,
        _context=context,
    )


class SchemaProblem(Exception):
    pass


def records_to_samples(records: list) -> LoadResult:
    samples: list[ConversationSample] = []
    quarantined: list[QuarantinedRecord] = []
    multi = 0
    for index, record in enumerate(records):
        try:
            sample = sample_from_record(record, index)
        except SchemaProblem as exc:
            quarantined.append(QuarantinedRecord(index, str(exc)))
            continue
        except Exception as exc:
            quarantined.append(QuarantinedRecord(index, f"record {index}: {exc}"))
            continue
        if sample.multi_action:
            multi += 1
        samples.append(sample)
    return LoadResult(samples, quarantined, multi)


def load_dataset(path: str) -> LoadResult:
    """Load a dataset file; bad records are quarantined, IO errors raise."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UnreadableFile(f"{path}: {exc}") from None
    if not raw.strip():
        return LoadResult([], [])
    try:
        top = json.loads(raw)
    except ValueError:
        # not one JSON document; try one record per line
        records = []
        for line in raw.splitlines():
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except ValueError as exc:
                raise UnreadableFile(f"{path}: {exc}") from None
        return records_to_samples(records)
    if not isinstance(top, list):
        raise UnreadableFile(f"{path}: top level is not an array")
    if top and all(isinstance(t, dict) for t in top):
        top = [top]  # a single bare record
    return records_to_samples(top)


def export_training_corpus(samples: list[ConversationSample], path: str) -> None:
    """Write samples in the canonical array-of-records shape; empty is fine."""
    payload = [s.to_record() for s in samples]
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise UnwritableFile(f"{path}: {exc}") from None


@dataclass(frozen=True)
class SplitSpec:
    """How to carve a test split: explicit per-class counts or a fraction.

    With a fraction, per-class quotas are apportioned largest-remainder so
    the total is exactly round(fraction * N); `floor` then lifts every class
    that has at least that many members to a minimum test count.
    """

    seed: int = 0
    test_fraction: float | None = None
    per_class_counts: dict[str, int] | None = None
    floor: int = 0

    def __post_init__(self):
        if (self.test_fraction is None) == (self.per_class_counts is None):
            raise ValueError("give exactly one of test_fraction or per_class_counts")
        if self.test_fraction is not None and not 0 <= self.test_fraction <= 1:
            raise ValueError("test_fraction must be within [0, 1]")


def _fraction_quotas(sizes: dict[str, int], fraction: float, floor: int) -> dict[str, int]:
    total_target = round(fraction * sum(sizes.values()))
    base = {label: int(fraction * size) for label, size in sizes.items()}
    remainders = sorted(
        sizes,
        key=lambda label: (-(fraction * sizes[label] - base[label]), label),
    )
    short = total_target - sum(base.values())
    for label in remainders[:short]:
        base[label] += 1
    if floor:
        for label, size in sizes.items():
            base[label] = max(base[label], min(floor, size))
    return base


def split_class_counts(samples_by_class: dict[str, int], spec: SplitSpec) -> dict[str, int]:
    if spec.per_class_counts is not None:
        counts = dict(spec.per_class_counts)
        for label, want in counts.items():
            have = samples_by_class.get(label, 0)
            if want > have:
                raise InsufficientClassSize(f"{label}: want {want} test, have {have}")
        return counts
    return _fraction_quotas(samples_by_class, spec.test_fraction, spec.floor)


def stratified_split(
    samples: list[ConversationSample], spec: SplitSpec
) -> tuple[list[ConversationSample], list[ConversationSample]]:
    """Deterministic per-class split into (train, test), original order kept."""
    by_class: dict[str, list[int]] = {}
    for i, sample in enumerate(samples):
        by_class.setdefault(sample.class_label, []).append(i)
    quotas = split_class_counts({k: len(v) for k, v in by_class.items()}, spec)

    test_indices: set[int] = set()
    for label, indices in sorted(by_class.items()):
        want = quotas.get(label, 0)
        if want > len(indices):
            raise InsufficientClassSize(f"{label}: want {want} test, have {len(indices)}")
        shuffled = list(indices)
        random.Random(f"{spec.seed}:{label}").shuffle(shuffled)
        test_indices.update(shuffled[:want])
    train = [s for i, s in enumerate(samples) if i not in test_indices]
    test = [s for i, s in enumerate(samples) if i in test_indices]
    return train, test


def split_fingerprint(spec: SplitSpec, samples: list[ConversationSample]) -> str:
    """Stable identifier for a concrete split decision."""
    by_class: dict[str, int] = {}
    for sample in samples:
        by_class[sample.class_label] = by_class.get(sample.class_label, 0) + 1
    quotas = split_class_counts(by_class, spec)
    payload = json.dumps(
        {"seed": spec.seed, "test_counts": {k: quotas[k] for k in sorted(quotas)}},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
