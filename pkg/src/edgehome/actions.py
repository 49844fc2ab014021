"""Parsing of generated assistant text into validated device actions.

An action travels inside the first fenced block tagged `homeassistant`:

    switching Master Bedroom state as requested
    ```homeassistant
    {"service": "cover.toggle", "target_device": "cover.master_bedroom"}
    ```

parse_assistant_output is total: any string maps to an AssistantOutput whose
outcome names exactly one failure class, never an exception.
"""

import json
from dataclasses import dataclass

from .errors import (
    EdgeHomeError,
    MalformedJson,
    MissingField,
    UnterminatedFence,
)
from .model import ActionCall, DeviceRegistry, ServiceCatalog, validate_action

OPEN_FENCE = "```homeassistant"
CLOSE_FENCE = "```"

# Outcome kinds, in report order. Validation kinds reuse the exception names.
OK = "Ok"
NO_ACTION_BLOCK = "NoActionBlock"
MALFORMED_JSON = "MalformedJson"
MISSING_FIELD = "MissingField"
UNKNOWN_SERVICE = "UnknownService"
UNKNOWN_DEVICE = "UnknownDevice"
DOMAIN_MISMATCH = "DomainMismatch"
MISSING_PARAM = "MissingParam"
UNEXPECTED_PARAM = "UnexpectedParam"

PARSE_ERROR_KINDS = (
    NO_ACTION_BLOCK,
    MALFORMED_JSON,
    MISSING_FIELD,
    UNKNOWN_SERVICE,
    UNKNOWN_DEVICE,
    DOMAIN_MISMATCH,
    MISSING_PARAM,
    UNEXPECTED_PARAM,
)


@dataclass(frozen=True)
class ParseOutcome:
    kind: str
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.kind == OK


@dataclass(frozen=True)
class AssistantOutput:
    """The parsed view of one generated reply.

    outcome.ok holds exactly when action is not None. extra_blocks counts
    fenced action blocks beyond the first, which are ignored.
    """

    response_text: str
    action: ActionCall | None
    outcome: ParseOutcome
    extra_blocks: int = 0


def _split_fences(raw: str) -> tuple[str, list[str], bool]:
    """Separate prose from fenced action blocks.

    Returns (response_text, blocks, unterminated). Fence-marker lines never
    leak into the response text.
    """
    outside: list[str] = []
    blocks: list[str] = []
    current: list[str] | None = None
    for line in raw.split("\n"):
        marker = line.rstrip()
        if current is None:
            if marker == OPEN_FENCE:
                current = []
            elif not marker.startswith(CLOSE_FENCE):
                outside.append(line)
        elif marker == CLOSE_FENCE:
            blocks.append("\n".join(current))
            current = None
        else:
            current.append(line)
    return "\n".join(outside).strip(), blocks, current is not None


def extract_action_block(raw: str) -> tuple[str, str | None]:
    """Return (response_text, first action block or None).

    Raises UnterminatedFence when an opening fence is never closed and no
    complete block precedes it.
    """
    response_text, blocks, unterminated = _split_fences(raw)
    if not blocks and unterminated:
        raise UnterminatedFence("opening fence without a closing fence")
    return response_text, blocks[0] if blocks else None


def _reject_duplicate_keys(pairs: list[tuple[str, object]]) -> dict:
    obj: dict = {}
    for key, value in pairs:
        if key in obj:
            raise MalformedJson(f"duplicate key {key!r}")
        obj[key] = value
    return obj


def parse_action_json(block: str) -> tuple[str, str, dict[str, float | str]]:
    """Parse one action block into (service, target_device, params).

    JSON must be strict: double quotes, no trailing commas, no duplicate
    keys. The device may be spelled `target_device` or `device`; if both
    appear they must agree. All other keys become candidate parameters and
    must hold scalar values.
    """
    try:
        obj = json.loads(block, object_pairs_hook=_reject_duplicate_keys)
    except MalformedJson:
        raise
    except (json.JSONDecodeError, RecursionError) as exc:
        raise MalformedJson(f"invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedJson(f"action must be a JSON object, got {type(obj).__name__}")

    spelled_target = obj.pop("target_device", None)
    spelled_device = obj.pop("device", None)
    if spelled_target is not None and spelled_device is not None:
        if spelled_target != spelled_device:
            raise MalformedJson("target_device and device disagree")
    device = spelled_target if spelled_target is not None else spelled_device
    if device is None:
        # `service` being present does not excuse a missing device, but a
        # missing service is reported first.
        if "service" not in obj:
            raise MissingField("service")
        raise MissingField("target_device")
    if "service" not in obj:
        raise MissingField("service")
    service = obj.pop("service")
    if not isinstance(service, str) or not isinstance(device, str):
        raise MalformedJson("service and target_device must be strings")

    params: dict[str, float | str] = {}
    for key, value in obj.items():
        if isinstance(value, bool) or value is None or isinstance(value, (list, dict)):
            raise MalformedJson(f"parameter {key!r} must be a string or number")
        params[key] = float(value) if isinstance(value, (int, float)) else value
    return service, device, params


def parse_assistant_output(
    raw: str, catalog: ServiceCatalog, registry: DeviceRegistry
) -> AssistantOutput:
    """Total parse of generated text; failures land in outcome, never raise."""
    response_text, blocks, unterminated = _split_fences(raw)
    extra_blocks = max(0, len(blocks) - 1)
    if not blocks:
        detail = "unterminated fence" if unterminated else "no action block"
        return AssistantOutput(response_text, None, ParseOutcome(NO_ACTION_BLOCK, detail))
    try:
        service, device, params = parse_action_json(blocks[0])
        action = validate_action(service, device, params, catalog, registry)
    except MissingField as exc:
        return AssistantOutput(
            response_text, None, ParseOutcome(MISSING_FIELD, exc.field), extra_blocks
        )
    except EdgeHomeError as exc:
        return AssistantOutput(
            response_text, None, ParseOutcome(exc.error_class, exc.message), extra_blocks
        )
    return AssistantOutput(response_text, action, ParseOutcome(OK), extra_blocks)
