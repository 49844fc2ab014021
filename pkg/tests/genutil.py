"""Random generators shared by the codec fuzz tests and acceptance suite."""

import random
import string

from edgehome.model import (
    Device,
    DeviceRegistry,
    DeviceState,
    EntityId,
    ServiceCatalog,
    ServiceSignature,
    legal_states,
)
from edgehome.promptdoc import SystemContext

_KNOWN_DOMAINS = [
    "light", "switch", "fan", "cover", "lock", "media_player", "timer", "vacuum",
]
_FREE_DOMAINS = ["climate", "todo", "humidifier", "siren"]
_NAME_WORDS = [
    "Kitchen", "Bedroom", "Office", "Garage", "Left", "Right", "Main", "Guest",
    "Upstairs", "Downstairs", "Porch", "Attic", "Tiny", "Old", "New",
]
_STATE_TOKENS = ["auto", "eco", "heat", "cool", "heat_cool", "idle", "busy", "level_2"]


def _snake(rng: random.Random, max_len: int = 10) -> str:
    alphabet = string.ascii_lowercase + string.digits + "_"
    return rng.choice(string.ascii_lowercase) + "".join(
        rng.choice(alphabet) for _ in range(rng.randrange(0, max_len))
    )


def _friendly_name(rng: random.Random) -> str:
    words = [rng.choice(_NAME_WORDS) for _ in range(rng.randrange(1, 4))]
    if rng.random() < 0.2:
        words[0] = words[0] + "'s"
    return " ".join(words)


def _attr_value(rng: random.Random, name: str) -> float | str:
    if name == "vol":
        return round(rng.random(), 2)
    roll = rng.random()
    if roll < 0.4:
        return round(rng.uniform(-50, 50), rng.randrange(0, 4))
    if roll < 0.55:
        return float(rng.randrange(0, 100))
    if roll < 0.7:
        return rng.random()
    return rng.choice(_STATE_TOKENS)


def random_catalog(rng: random.Random) -> ServiceCatalog:
    catalog = ServiceCatalog()
    n = rng.randrange(1, 12)
    seen = set()
    while len(catalog) < n:
        domain = rng.choice(_KNOWN_DOMAINS + _FREE_DOMAINS)
        name = _snake(rng)
        if (domain, name) in seen:
            continue
        seen.add((domain, name))
        param_count = rng.choice((0, 0, 0, 1, 2))
        params, used = [], set()
        while len(params) < param_count:
            p = _snake(rng, 6)
            if p not in used:
                used.add(p)
                params.append(p)
        catalog.add(ServiceSignature(domain, name, tuple(params)))
    return catalog


def random_registry(rng: random.Random, catalog: ServiceCatalog) -> DeviceRegistry:
    domains = sorted({s.domain for s in catalog})
    registry = DeviceRegistry()
    n = rng.randrange(1, 8)
    seen = set()
    while len(registry) < n:
        domain = rng.choice(domains)
        object_id = _snake(rng)
        if (domain, object_id) in seen:
            continue
        seen.add((domain, object_id))
        known = legal_states(domain)
        state = rng.choice(sorted(known)) if known else rng.choice(_STATE_TOKENS)
        attributes = {}
        for _ in range(rng.randrange(0, 3)):
            attr = rng.choice(["vol", "speed", "mode", "temperature", "humidity"])
            if attr == "vol" and domain != "media_player" and rng.random() < 0.5:
                continue
            attributes[attr] = _attr_value(rng, attr)
        registry.add(
            Device(EntityId(domain, object_id), _friendly_name(rng), DeviceState(state, attributes))
        )
    return registry


def random_context(rng: random.Random) -> SystemContext:
    catalog = random_catalog(rng)
    registry = random_registry(rng, catalog)
    preamble = rng.choice([
        "",
        "You are a terse home controller.",
        "Control the devices listed below.\nNever invent devices.",
    ])
    return SystemContext(catalog, registry, preamble)
