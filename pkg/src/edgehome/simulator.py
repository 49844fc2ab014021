"""Deterministic device-state simulator.

Each (domain, service) pair carries a total transition map over the domain's
legal primary states plus a list of scalar attribute effects. Transitions are
instantaneous; services that are semantically no-ops (turning on a lit light)
succeed without changing anything.
"""

import threading
import time
from dataclasses import dataclass

from .errors import StaleAction, UnknownDomain, UnknownService
from .model import (
    ActionCall,
    Device,
    DeviceRegistry,
    DeviceState,
    ServiceCatalog,
    ServiceSignature,
    legal_states,
)
from .text import parse_scalar

VOLUME_STEP = 0.1


@dataclass(frozen=True)
class AttributeEffect:
    """One scalar mutation: set a value (literal or from a call parameter),
    or add a constant clamped into bounds."""

    attribute: str
    op: str  # "set" | "add_clamped"
    value: float | str | None = None
    from_param: str | None = None
    bounds: tuple[float, float] = (0.0, 1.0)

    def apply(self, attributes: dict[str, float | str], params: dict) -> None:
        if self.op == "set":
            operand = params.get(self.from_param) if self.from_param else self.value
            if operand is None:
                return
            attributes[self.attribute] = (
                parse_scalar(operand) if isinstance(operand, str) else float(operand)
            )
            return
        base = attributes.get(self.attribute)
        base = float(base) if isinstance(base, (int, float)) else self.bounds[0]
        lo, hi = self.bounds
        attributes[self.attribute] = min(max(base + float(self.value), lo), hi)


@dataclass(frozen=True)
class ServiceEffect:
    """Transition map for one service; None means the state never changes
    (used for free-form domains such as climate)."""

    transitions: dict[str, str] | None
    attribute_effects: tuple[AttributeEffect, ...] = ()

    def next_state(self, current: str) -> str:
        if self.transitions is None:
            return current
        return self.transitions[current]


class TransitionTable:
    """Service effects keyed by canonical service name, total over legal states."""

    def __init__(self, effects: dict[str, ServiceEffect]):
        for canonical, effect in effects.items():
            domain = canonical.split(".", 1)[0]
            states = legal_states(domain)
            if effect.transitions is None:
                continue
            if states is None or set(effect.transitions) != set(states):
                raise UnknownDomain(
                    f"transition map for {canonical} does not cover {domain} states"
                )
            if not set(effect.transitions.values()) <= set(states):
                raise UnknownDomain(f"transition map for {canonical} leaves legal states")
        self._effects = dict(effects)

    def effect_for(self, service: ServiceSignature) -> ServiceEffect:
        effect = self._effects.get(service.canonical)
        if effect is None:
            raise UnknownService(service.canonical)
        return effect

    def services(self) -> list[str]:
        return list(self._effects)

    def __contains__(self, canonical: str) -> bool:
        return canonical in self._effects


def _toggle(*pairs: tuple[str, str]) -> dict[str, str]:
    table: dict[str, str] = {}
    for a, b in pairs:
        table[a] = b
        table[b] = a
    return table


def _all_to(states: frozenset[str], target: str) -> dict[str, str]:
    return {s: target for s in states}


def _identity(states: frozenset[str]) -> dict[str, str]:
    return {s: s for s in states}


def _onoff_effects(domain: str) -> dict[str, ServiceEffect]:
    states = legal_states(domain)
    return {
        f"{domain}.turn_on": ServiceEffect(_all_to(states, "on")),
        f"{domain}.turn_off": ServiceEffect(_all_to(states, "off")),
        f"{domain}.toggle": ServiceEffect(_toggle(("on", "off"))),
    }


def _builtin_effects() -> dict[str, ServiceEffect]:
    effects: dict[str, ServiceEffect] = {}
    effects.update(_onoff_effects("light"))
    effects.update(_onoff_effects("switch"))
    effects.update(_onoff_effects("fan"))
    fan_states = legal_states("fan")
    effects["fan.increase_speed"] = ServiceEffect(
        _identity(fan_states), (AttributeEffect("speed", "add_clamped", VOLUME_STEP),)
    )
    effects["fan.decrease_speed"] = ServiceEffect(
        _identity(fan_states), (AttributeEffect("speed", "add_clamped", -VOLUME_STEP),)
    )

    cover = legal_states("cover")
    open_all = _all_to(cover, "open")
    closed_all = _all_to(cover, "closed")
    stop = {"opening": "open", "closing": "closed", "open": "open", "closed": "closed"}
    for name, table in (
        ("open_cover", open_all), ("open", open_all),
        ("close_cover", closed_all), ("close", closed_all),
        ("stop_cover", stop), ("stop", stop),
    ):
        effects[f"cover.{name}"] = ServiceEffect(dict(table))
    effects["cover.toggle"] = ServiceEffect(
        _toggle(("open", "closed"), ("opening", "closing"))
    )

    lock = legal_states("lock")
    effects["lock.lock"] = ServiceEffect(_all_to(lock, "locked"))
    effects["lock.unlock"] = ServiceEffect(_all_to(lock, "unlocked"))

    mp = legal_states("media_player")
    vol_up = (AttributeEffect("vol", "add_clamped", VOLUME_STEP),)
    vol_down = (AttributeEffect("vol", "add_clamped", -VOLUME_STEP),)
    effects.update({
        "media_player.turn_on": ServiceEffect({**_identity(mp), "off": "on"}),
        "media_player.turn_off": ServiceEffect(_all_to(mp, "off")),
        "media_player.toggle": ServiceEffect(
            {**_toggle(("on", "off"), ("playing", "paused")), "standby": "standby"}
        ),
        "media_player.media_play": ServiceEffect({**_all_to(mp, "playing"), "off": "off"}),
        "media_player.media_pause": ServiceEffect({**_identity(mp), "playing": "paused"}),
        "media_player.media_play_pause": ServiceEffect(
            {**_identity(mp), **_toggle(("playing", "paused"))}
        ),
        "media_player.media_stop": ServiceEffect(
            {**_identity(mp), "playing": "standby", "paused": "standby"}
        ),
        "media_player.media_next_track": ServiceEffect(_identity(mp)),
        "media_player.media_previous_track": ServiceEffect(_identity(mp)),
        "media_player.volume_up": ServiceEffect(_identity(mp), vol_up),
        "media_player.volume_down": ServiceEffect(_identity(mp), vol_down),
        "media_player.volume_mute": ServiceEffect(
            _identity(mp), (AttributeEffect("vol", "set", 0.0),)
        ),
    })

    timer = legal_states("timer")
    effects["timer.start"] = ServiceEffect(
        _all_to(timer, "active"),
        (AttributeEffect("duration", "set", from_param="duration"),),
    )
    effects["timer.cancel"] = ServiceEffect(_all_to(timer, "idle"))
    effects["timer.pause"] = ServiceEffect({**_identity(timer), "active": "paused"})

    vac = legal_states("vacuum")
    halt = {**_identity(vac), "cleaning": "paused", "returning": "paused"}
    effects["vacuum.start"] = ServiceEffect(_all_to(vac, "cleaning"))
    effects["vacuum.stop"] = ServiceEffect(dict(halt))
    effects["vacuum.pause"] = ServiceEffect(dict(halt))
    effects["vacuum.return_to_base"] = ServiceEffect(
        {**_all_to(vac, "returning"), "docked": "docked"}
    )

    for climate_param in ("fan_mode", "humidity", "hvac_mode", "temperature"):
        effects[f"climate.set_{climate_param}"] = ServiceEffect(
            None, (AttributeEffect(climate_param, "set", from_param=climate_param),)
        )
    effects["todo.add_item"] = ServiceEffect(
        None, (AttributeEffect("last_item", "set", from_param="item"),)
    )
    return effects


_BUILTIN_DOMAINS = frozenset(
    canonical.split(".", 1)[0] for canonical in _builtin_effects()
)


def default_transition_table(catalog: ServiceCatalog) -> TransitionTable:
    """Effects for every service in the catalog, from the built-in set.

    Raises UnknownDomain for a domain with no built-in behavior and
    UnknownService for an unknown service inside a known domain.
    """
    builtin = _builtin_effects()
    effects: dict[str, ServiceEffect] = {}
    for signature in catalog:
        if signature.domain not in _BUILTIN_DOMAINS:
            raise UnknownDomain(signature.domain)
        if signature.canonical not in builtin:
            raise UnknownService(signature.canonical)
        effects[signature.canonical] = builtin[signature.canonical]
    return TransitionTable(effects)


@dataclass(frozen=True)
class ExecutionRecord:
    """One applied action: what ran, and the state before and after."""

    action: ActionCall
    prior_state: DeviceState
    new_state: DeviceState
    timestamp: float

    def to_json_obj(self) -> dict:
        return {
            "service": self.action.service.canonical,
            "target_device": self.action.target_device.canonical,
            "params": dict(self.action.params),
            "prior_state": self.prior_state.primary_state,
            "new_state": self.new_state.primary_state,
            "attributes": dict(self.new_state.attributes),
            "timestamp": self.timestamp,
        }


def execute(
    action: ActionCall, registry: DeviceRegistry, table: TransitionTable
) -> ExecutionRecord:
    """Apply one validated action to the registry.

    The registry is untouched when anything fails. Raises StaleAction when
    the target device has disappeared since validation.
    """
    key = action.target_device.canonical
    device = registry.get(key)
    if device is None:
        raise StaleAction(key)
    effect = table.effect_for(action.service)
    prior = device.state.copy()
    attributes = dict(prior.attributes)
    for attr_effect in effect.attribute_effects:
        attr_effect.apply(attributes, action.params)
    new_state = DeviceState(effect.next_state(prior.primary_state), attributes)
    registry.replace_state(key, new_state)
    return ExecutionRecord(action, prior, new_state, time.monotonic())


class HomeSimulator:
    """A registry plus its transition table and an append-only event log."""

    def __init__(
        self,
        catalog: ServiceCatalog,
        registry: DeviceRegistry,
        table: TransitionTable | None = None,
    ):
        self.catalog = catalog
        self.registry = registry
        self.table = table if table is not None else default_transition_table(catalog)
        self._log: list[ExecutionRecord] = []
        self._lock = threading.Lock()

    def execute(self, action: ActionCall) -> ExecutionRecord:
        with self._lock:
            record = execute(action, self.registry, self.table)
            self._log.append(record)
            return record

    def events_since(self, cursor: int) -> tuple[list[ExecutionRecord], int]:
        cursor = max(0, int(cursor))
        with self._lock:
            return list(self._log[cursor:]), len(self._log)

    def event_count(self) -> int:
        with self._lock:
            return len(self._log)

    def snapshot(self) -> list[Device]:
        with self._lock:
            return [Device(d.id, d.friendly_name, d.state.copy()) for d in self.registry]
