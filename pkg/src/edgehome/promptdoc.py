"""Bidirectional codec between structured home context and prompt text.

The wire layout of a system prompt is:

    <preamble>
    Services: <sig>, <sig>, ...
    Devices: <entity_id> '<friendly name>' = <state>[; <attr>=<value>]*
    <entity_id> '<friendly name>' = <state>...

parse_system_prompt(render_system_prompt(ctx)) reproduces ctx exactly,
including device order, attribute order, and float formatting.
"""

import json
from dataclasses import dataclass

from .errors import (
    DuplicateService,
    EmptyContext,
    EmptyUtterance,
    MalformedDeviceLine,
    MalformedServiceList,
    MissingSection,
)
from .model import (
    Device,
    DeviceRegistry,
    DeviceState,
    MalformedServiceName,
    ServiceCatalog,
    ServiceSignature,
    parse_entity_id,
)
from .text import format_scalar, parse_scalar
from .defaults import DEFAULT_PREAMBLE

_SERVICES_MARK = "Services: "
_DEVICES_MARK = "Devices: "

SPEAKERS = ("system", "user", "assistant")


@dataclass(frozen=True)
class ChatTurn:
    speaker: str
    value: str

    def __post_init__(self):
        if self.speaker not in SPEAKERS:
            raise ValueError(f"unknown speaker: {self.speaker!r}")

    def to_json_obj(self) -> dict:
        return {"from": self.speaker, "value": self.value}

    @staticmethod
    def from_json_obj(obj: dict) -> "ChatTurn":
        return ChatTurn(obj["from"], obj["value"])


@dataclass(frozen=True)
class PromptDocument:
    """An ordered list of chat turns, serializable to the from/value JSON shape."""

    turns: tuple[ChatTurn, ...]

    @property
    def user_text(self) -> str:
        for turn in reversed(self.turns):
            if turn.speaker == "user":
                return turn.value
        return ""

    def flatten(self) -> str:
        """Single-string prompt for completion-style runtimes."""
        parts = [f"<|{t.speaker}|>\n{t.value}" for t in self.turns]
        parts.append("<|assistant|>\n")
        return "\n".join(parts)

    def to_json_obj(self) -> list[dict]:
        return [t.to_json_obj() for t in self.turns]

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), ensure_ascii=False)

    @staticmethod
    def from_json_obj(obj: list) -> "PromptDocument":
        return PromptDocument(tuple(ChatTurn.from_json_obj(t) for t in obj))

    @staticmethod
    def from_json(text: str) -> "PromptDocument":
        return PromptDocument.from_json_obj(json.loads(text))


@dataclass
class SystemContext:
    """Everything the system prompt communicates: preamble, services, devices."""

    catalog: ServiceCatalog
    registry: DeviceRegistry
    preamble: str = DEFAULT_PREAMBLE

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SystemContext)
            and self.preamble == other.preamble
            and self.catalog == other.catalog
            and self.registry == other.registry
        )


def render_device_line(device: Device) -> str:
    parts = [f"{device.id.canonical} '{device.friendly_name}' = {device.state.primary_state}"]
    for name, value in device.state.attributes.items():
        parts.append(f"{name}={format_scalar(value)}")
    return "; ".join(parts)


def render_system_prompt(ctx: SystemContext) -> str:
    if len(ctx.catalog) == 0 or len(ctx.registry) == 0:
        raise EmptyContext("system prompt needs at least one service and one device")
    services = ", ".join(sig.display() for sig in ctx.catalog)
    devices = "\n".join(render_device_line(d) for d in ctx.registry)
    head = f"{ctx.preamble}\n" if ctx.preamble else ""
    return f"{head}{_SERVICES_MARK}{services}\n{_DEVICES_MARK}{devices}"


def render_chat(ctx: SystemContext, user_utterance: str) -> PromptDocument:
    if not user_utterance.strip():
        raise EmptyUtterance("user utterance is empty")
    return PromptDocument((
        ChatTurn("system", render_system_prompt(ctx)),
        ChatTurn("user", user_utterance),
    ))


def _split_service_list(text: str) -> list[str]:
    # Commas inside a parameter list do not separate signatures.
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts]


def _parse_device_line(line: str, line_number: int) -> Device:
    def fail(why: str) -> MalformedDeviceLine:
        return MalformedDeviceLine(f"line {line_number}: {why}: {line!r}", line_number)

    head, sep, rest = line.partition(" ")
    if not sep or not rest.startswith("'"):
        raise fail("expected `<entity_id> '<name>' = <state>`")
    try:
        entity_id = parse_entity_id(head)
    except Exception:
        raise fail(f"bad entity id {head!r}") from None
    name_end = rest.rfind("' = ")
    if name_end < 1:
        raise fail("missing `' = ` separator")
    friendly_name = rest[1:name_end]
    state_text = rest[name_end + len("' = "):]
    fields = state_text.split("; ")
    primary_state = fields[0]
    attributes: dict[str, float | str] = {}
    for attr_text in fields[1:]:
        attr_name, eq, attr_value = attr_text.partition("=")
        if not eq or not attr_name:
            raise fail(f"bad attribute {attr_text!r}")
        if attr_name in attributes:
            raise fail(f"duplicate attribute {attr_name!r}")
        attributes[attr_name] = parse_scalar(attr_value)
    try:
        return Device(entity_id, friendly_name, DeviceState(primary_state, attributes))
    except Exception as exc:
        raise fail(str(exc)) from None


def parse_system_prompt(text: str) -> SystemContext:
    """Recover the SystemContext from rendered prompt text.

    Raises MissingSection when either marker is absent, MalformedServiceList
    for an unparseable service entry, and MalformedDeviceLine (carrying the
    1-based line number in the prompt) for an unparseable device line.
    """
    lines = text.split("\n")
    services_at = next(
        (i for i, l in enumerate(lines) if l.startswith(_SERVICES_MARK)), None
    )
    if services_at is None:
        raise MissingSection("no `Services: ` section")
    devices_at = next(
        (i for i, l in enumerate(lines) if i > services_at and l.startswith(_DEVICES_MARK)),
        None,
    )
    if devices_at is None:
        raise MissingSection("no `Devices: ` section")
    for i in range(services_at + 1, devices_at):
        if lines[i].strip():
            raise MalformedServiceList(f"unexpected text between sections: {lines[i]!r}")

    preamble = "\n".join(lines[:services_at])
    catalog = ServiceCatalog()
    service_text = lines[services_at][len(_SERVICES_MARK):]
    if not service_text.strip():
        raise MalformedServiceList("empty service list")
    for part in _split_service_list(service_text):
        try:
            signature = ServiceSignature.parse(part)
        except MalformedServiceName:
            raise MalformedServiceList(f"bad service entry {part!r}") from None
        try:
            catalog.add(signature)
        except DuplicateService:
            raise MalformedServiceList(f"duplicate service {signature.canonical}") from None

    device_lines = [lines[devices_at][len(_DEVICES_MARK):]] + lines[devices_at + 1:]
    while device_lines and not device_lines[-1].strip():
        device_lines.pop()
    if not device_lines:
        raise MalformedDeviceLine("empty device section", devices_at + 1)
    registry = DeviceRegistry()
    for offset, line in enumerate(device_lines):
        line_number = devices_at + 1 + offset
        device = _parse_device_line(line, line_number)
        if device.id.canonical in registry:
            raise MalformedDeviceLine(
                f"line {line_number}: duplicate device {device.id.canonical}", line_number
            )
        registry.add(device)
    return SystemContext(catalog, registry, preamble)
