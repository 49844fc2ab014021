"""Core domain model: entity ids, service signatures, device state, and action validation.

Everything downstream (codec, parser, simulator, evaluation, service) builds on
these types. Lookups are exact string matches by design: a predicted action is
either literally resolvable against the catalog/registry or it is an error.
"""

import re
from dataclasses import dataclass, field

from .errors import (
    DomainMismatch,
    DuplicateDevice,
    DuplicateService,
    IllegalState,
    MalformedEntityId,
    MissingParam,
    UnexpectedParam,
    UnknownDevice,
    UnknownService,
)

_NAME_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_STATE_RE = re.compile(r"[a-z0-9][a-z0-9_.]*\Z")
_SIGNATURE_RE = re.compile(
    r"([a-z][a-z0-9_]*)\.([a-z][a-z0-9_]*)\(([^()]*)\)\Z"
)

# Domains with a closed primary-state vocabulary. Domains absent from this
# table (climate, todo, anything exotic) accept any state token.
PRIMARY_STATES: dict[str, frozenset[str]] = {
    "light": frozenset({"on", "off"}),
    "switch": frozenset({"on", "off"}),
    "fan": frozenset({"on", "off"}),
    "cover": frozenset({"open", "closed", "opening", "closing"}),
    "lock": frozenset({"locked", "unlocked"}),
    "media_player": frozenset({"playing", "paused", "standby", "off", "on"}),
    "timer": frozenset({"active", "idle", "paused"}),
    "vacuum": frozenset({"docked", "cleaning", "paused", "returning"}),
}


def legal_states(domain: str) -> frozenset[str] | None:
    """Closed state set for a domain, or None when the domain is free-form."""
    return PRIMARY_STATES.get(domain)


@dataclass(frozen=True)
class EntityId:
    """A device identity: `<domain>.<object_id>`, both lowercase snake case."""

    domain: str
    object_id: str

    def __post_init__(self):
        if not _NAME_RE.match(self.domain) or not _NAME_RE.match(self.object_id):
            raise MalformedEntityId(
                f"bad entity id parts: {self.domain!r}.{self.object_id!r}"
            )

    @property
    def canonical(self) -> str:
        return f"{self.domain}.{self.object_id}"

    def __str__(self) -> str:
        return self.canonical


def parse_entity_id(text: str) -> EntityId:
    """Parse `<domain>.<object_id>`; exactly one dot, both parts snake case."""
    if not isinstance(text, str) or text.count(".") != 1:
        raise MalformedEntityId(f"not an entity id: {text!r}")
    domain, object_id = text.split(".")
    return EntityId(domain, object_id)


class MalformedServiceName(ValueError):
    """Service signature text violates the `<domain>.<name>(<params>)` grammar."""


@dataclass(frozen=True)
class ServiceSignature:
    """A callable service: domain, name, and an ordered tuple of parameter names."""

    domain: str
    name: str
    params: tuple[str, ...] = ()

    def __post_init__(self):
        if not _NAME_RE.match(self.domain) or not _NAME_RE.match(self.name):
            raise MalformedServiceName(f"bad service name: {self.domain!r}.{self.name!r}")
        for p in self.params:
            if not _NAME_RE.match(p):
                raise MalformedServiceName(f"bad parameter name: {p!r}")
        if len(set(self.params)) != len(self.params):
            raise MalformedServiceName(f"duplicate parameter names in {self.params!r}")

    @property
    def canonical(self) -> str:
        return f"{self.domain}.{self.name}"

    def display(self) -> str:
        """Form used in system prompts, e.g. `timer.start(duration)`."""
        return f"{self.canonical}({','.join(self.params)})"

    @staticmethod
    def parse(text: str) -> "ServiceSignature":
        m = _SIGNATURE_RE.match(text.strip())
        if not m:
            raise MalformedServiceName(f"not a service signature: {text!r}")
        domain, name, raw_params = m.groups()
        params = tuple(p.strip() for p in raw_params.split(",")) if raw_params.strip() else ()
        return ServiceSignature(domain, name, params)


@dataclass(frozen=True)
class DeviceState:
    """Primary state token plus scalar attributes (floats or plain strings)."""

    primary_state: str
    attributes: dict[str, float | str] = field(default_factory=dict)

    def __post_init__(self):
        if not _STATE_RE.match(self.primary_state):
            raise IllegalState(f"bad state token: {self.primary_state!r}")
        for name, value in self.attributes.items():
            if not _NAME_RE.match(name):
                raise IllegalState(f"bad attribute name: {name!r}")
            if isinstance(value, str):
                _check_attr_text(name, value)
            elif name == "vol" and not 0.0 <= float(value) <= 1.0:
                raise IllegalState(f"vol out of [0, 1]: {value!r}")

    def copy(self) -> "DeviceState":
        return DeviceState(self.primary_state, dict(self.attributes))


def _check_attr_text(name: str, value: str) -> None:
    # String attribute values travel on a single `; `-separated device line,
    # so separators and numeric-looking text would not survive a round trip.
    if not value or value != value.strip():
        raise IllegalState(f"attribute {name!r} has blank-padded or empty value")
    if any(ch in value for ch in "\n;="):
        raise IllegalState(f"attribute {name!r} value contains a separator: {value!r}")
    try:
        float(value)
    except ValueError:
        return
    raise IllegalState(f"attribute {name!r}: numeric text must be stored as a float")


@dataclass(frozen=True)
class Device:
    """A named device with a current state; the id's domain fixes the legal states."""

    id: EntityId
    friendly_name: str
    state: DeviceState

    def __post_init__(self):
        if not self.friendly_name or "\n" in self.friendly_name:
            raise IllegalState(f"bad friendly name: {self.friendly_name!r}")
        if "' = " in self.friendly_name:
            raise IllegalState("friendly name may not contain the `' = ` separator")
        allowed = legal_states(self.id.domain)
        if allowed is not None and self.state.primary_state not in allowed:
            raise IllegalState(
                f"{self.state.primary_state!r} is not a legal {self.id.domain} state"
            )

    def with_state(self, state: DeviceState) -> "Device":
        return Device(self.id, self.friendly_name, state)


class DeviceRegistry:
    """Insertion-ordered device collection keyed by canonical entity id."""

    def __init__(self, devices: list[Device] | None = None):
        self._devices: dict[str, Device] = {}
        for d in devices or []:
            self.add(d)

    def add(self, device: Device) -> None:
        key = device.id.canonical
        if key in self._devices:
            raise DuplicateDevice(f"device already registered: {key}")
        self._devices[key] = device

    def get(self, entity_id: str) -> Device | None:
        return self._devices.get(entity_id)

    def replace_state(self, entity_id: str, state: DeviceState) -> Device:
        device = self._devices.get(entity_id)
        if device is None:
            raise UnknownDevice(entity_id)
        updated = device.with_state(state)
        self._devices[entity_id] = updated
        return updated

    def devices(self) -> list[Device]:
        return list(self._devices.values())

    def copy(self) -> "DeviceRegistry":
        return DeviceRegistry(
            [Device(d.id, d.friendly_name, d.state.copy()) for d in self.devices()]
        )

    def __iter__(self):
        return iter(self._devices.values())

    def __len__(self) -> int:
        return len(self._devices)

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self._devices

    def __eq__(self, other) -> bool:
        return isinstance(other, DeviceRegistry) and self._devices == other._devices


class ServiceCatalog:
    """Insertion-ordered service collection keyed by canonical service name."""

    def __init__(self, services: list[ServiceSignature] | None = None):
        self._services: dict[str, ServiceSignature] = {}
        for s in services or []:
            self.add(s)

    def add(self, signature: ServiceSignature) -> None:
        key = signature.canonical
        if key in self._services:
            raise DuplicateService(f"service already registered: {key}")
        self._services[key] = signature

    def get(self, canonical: str) -> ServiceSignature | None:
        return self._services.get(canonical)

    def services(self) -> list[ServiceSignature]:
        return list(self._services.values())

    def __iter__(self):
        return iter(self._services.values())

    def __len__(self) -> int:
        return len(self._services)

    def __contains__(self, canonical: str) -> bool:
        return canonical in self._services

    def __eq__(self, other) -> bool:
        return isinstance(other, ServiceCatalog) and self._services == other._services


@dataclass(frozen=True)
class ActionCall:
    """A validated service call against a concrete device.

    Build through validate_action; the constructor itself does not re-check
    the catalog/registry invariants.
    """

    service: ServiceSignature
    target_device: EntityId
    params: dict[str, float | str] = field(default_factory=dict)


def validate_action(
    service: str,
    target_device: str,
    params: dict,
    catalog: ServiceCatalog,
    registry: DeviceRegistry,
) -> ActionCall:
    """Resolve raw (service, device, params) strings into an ActionCall.

    Resolution is exact: no fuzzy matching, no case folding. Raises
    UnknownService, UnknownDevice, DomainMismatch, MissingParam, or
    UnexpectedParam, each naming the offending string.
    """
    signature = catalog.get(service)
    if signature is None:
        raise UnknownService(service)
    device = registry.get(target_device)
    if device is None:
        raise UnknownDevice(target_device)
    if signature.domain != device.id.domain:
        raise DomainMismatch(
            f"service {signature.canonical} cannot target {device.id.canonical}"
        )
    for p in signature.params:
        if p not in params:
            raise MissingParam(p)
    for key in sorted(params):
        if key not in signature.params:
            raise UnexpectedParam(key)
    return ActionCall(signature, device.id, dict(params))
