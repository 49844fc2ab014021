"""Deterministic synthetic corpus generation for desk-scale runs.

No full-size corpus ships with this repository, so replay, baseline, and
report pipelines are exercised on generated conversations. Every sample is a
system/user/assistant record over the builtin service catalog and a small
randomized home. Generation is a pure function of the seed.

Utterance templates are disjoint within a domain, and any parameter value is
spelled out in the utterance, so the mapping from user text to gold action is
a function. Replaying gold answers keyed on user text is therefore lossless
at the action level even when two samples share an utterance.
"""

import json
import random
from dataclasses import dataclass

from .defaults import builtin_catalog
from .model import Device, DeviceRegistry, DeviceState, legal_states, parse_entity_id
from .promptdoc import SystemContext, render_system_prompt

_FLEET: dict[str, tuple[tuple[str, str], ...]] = {
    "light": (
        ("light.kitchen", "Kitchen Light"),
        ("light.bedroom", "Bedroom Light"),
        ("light.living_room", "Living Room Light"),
        ("light.porch", "Porch Light"),
    ),
    "switch": (
        ("switch.garage", "Garage Switch"),
        ("switch.basement", "Basement Switch"),
        ("switch.garden", "Garden Switch"),
    ),
    "fan": (
        ("fan.bedroom", "Bedroom Fan"),
        ("fan.attic", "Attic Fan"),
    ),
    "cover": (
        ("cover.garage", "Garage Door"),
        ("cover.master_bedroom", "Master Bedroom Blinds"),
        ("cover.patio", "Patio Shade"),
    ),
    "lock": (
        ("lock.front_door", "Front Door Lock"),
        ("lock.office", "Office Lock"),
    ),
    "media_player": (("media_player.living_room", "Living Room Speaker"),),
    "timer": (("timer.kitchen_oven", "Kitchen Oven Timer"),),
    "vacuum": (("vacuum.downstairs", "Downstairs Vacuum"),),
    "climate": (("climate.hallway", "Hallway Thermostat"),),
    "todo": (("todo.shopping", "Shopping List"),),
}

_UTTERANCES: dict[str, tuple[str, ...]] = {
    "turn_on": (
        "turn on the {name}",
        "switch on the {name}",
        "power on the {name}",
        "could you turn on the {name}",
    ),
    "turn_off": (
        "turn off the {name}",
        "switch off the {name}",
        "power down the {name}",
        "shut off the {name}",
    ),
    "toggle": (
        "toggle the {name}",
        "flip the {name}",
        "invert the {name}",
    ),
    "fan.increase_speed": (
        "speed up the {name}",
        "make the {name} faster",
        "increase the {name} speed",
    ),
    "fan.decrease_speed": (
        "slow down the {name}",
        "make the {name} slower",
        "decrease the {name} speed",
    ),
    "cover.open": ("open the {name}", "raise the {name}", "roll up the {name}"),
    "cover.close": ("close the {name}", "lower the {name}", "roll down the {name}"),
    "cover.stop": (
        "stop the {name}",
        "halt the {name}",
        "hold the {name} right there",
    ),
    "cover.toggle": (
        "toggle the {name}",
        "flip the {name} the other way",
        "reverse the {name}",
    ),
    "lock.lock": ("lock the {name}", "secure the {name}", "engage the {name}"),
    "lock.unlock": ("unlock the {name}", "open up the {name}", "release the {name}"),
    "media_player.media_play": (
        "play music on the {name}",
        "start playback on the {name}",
        "resume the {name}",
    ),
    "media_player.media_pause": (
        "pause the {name}",
        "hold the music on the {name}",
    ),
    "media_player.media_stop": (
        "stop the music on the {name}",
        "end playback on the {name}",
    ),
    "media_player.media_next_track": (
        "skip this song on the {name}",
        "next track on the {name}",
        "play the next song on the {name}",
    ),
    "media_player.media_previous_track": (
        "go back a track on the {name}",
        "previous song on the {name}",
        "replay the last song on the {name}",
    ),
    "media_player.volume_up": (
        "turn up the {name}",
        "raise the volume on the {name}",
        "make the {name} louder",
    ),
    "media_player.volume_down": (
        "turn down the {name}",
        "lower the volume on the {name}",
        "make the {name} quieter",
    ),
    "media_player.volume_mute": ("mute the {name}", "silence the {name}"),
    "timer.start": (
        "start a {minutes} minute timer on the {name}",
        "set the {name} for {minutes} minutes",
    ),
    "timer.cancel": ("cancel the {name}", "stop the {name} countdown"),
    "climate.set_temperature": (
        "set the {name} to {temperature} degrees",
        "make it {temperature} degrees on the {name}",
    ),
    "climate.set_humidity": (
        "set the {name} humidity to {humidity} percent",
        "keep the {name} at {humidity} percent humidity",
    ),
    "climate.set_hvac_mode": (
        "switch the {name} to {hvac_mode} mode",
        "put the {name} in {hvac_mode} mode",
    ),
    "climate.set_fan_mode": (
        "set the {name} fan to {fan_mode}",
        "run the {name} fan on {fan_mode}",
    ),
    "todo.add_item": ("add {item} to the {name}", "put {item} on the {name}"),
    "vacuum.start": (
        "start the {name}",
        "begin cleaning with the {name}",
        "run the {name}",
    ),
    "vacuum.stop": ("stop the {name}", "shut down the {name}"),
    "vacuum.pause": ("pause the {name}", "suspend the {name}"),
    "vacuum.return_to_base": (
        "send the {name} home",
        "dock the {name}",
        "return the {name} to its base",
    ),
}

_RESPONSES: dict[str, tuple[str, ...]] = {
    "turn_on": ("Sure, turning on the {name}.", "Okay, the {name} is now on."),
    "turn_off": ("Okay, turning off the {name}.", "Done, the {name} is off."),
    "toggle": ("Toggling the {name} now.", "Okay, flipping the {name}."),
    "fan.increase_speed": ("Raising the speed of the {name}.",),
    "fan.decrease_speed": ("Lowering the speed of the {name}.",),
    "cover.open": ("Opening the {name}.", "Sure, the {name} is opening."),
    "cover.close": ("Closing the {name}.", "Sure, the {name} is closing."),
    "cover.stop": ("Stopping the {name}.",),
    "cover.toggle": ("Reversing the {name}.",),
    "lock.lock": ("Locking the {name}.", "The {name} is now locked."),
    "lock.unlock": ("Unlocking the {name}.", "The {name} is now unlocked."),
    "media_player.media_play": ("Starting playback on the {name}.",),
    "media_player.media_pause": ("Pausing the {name}.",),
    "media_player.media_stop": ("Stopping playback on the {name}.",),
    "media_player.media_next_track": ("Skipping to the next track on the {name}.",),
    "media_player.media_previous_track": ("Going back a track on the {name}.",),
    "media_player.volume_up": ("Turning up the {name}.",),
    "media_player.volume_down": ("Turning down the {name}.",),
    "media_player.volume_mute": ("Muting the {name}.",),
    "timer.start": ("Starting a {minutes} minute timer on the {name}.",),
    "timer.cancel": ("Cancelling the {name}.",),
    "climate.set_temperature": ("Setting the {name} to {temperature} degrees.",),
    "climate.set_humidity": ("Setting the {name} humidity to {humidity} percent.",),
    "climate.set_hvac_mode": ("Switching the {name} to {hvac_mode} mode.",),
    "climate.set_fan_mode": ("Setting the {name} fan to {fan_mode}.",),
    "todo.add_item": ("Adding {item} to the {name}.",),
    "vacuum.start": ("Starting the {name}.",),
    "vacuum.stop": ("Stopping the {name}.",),
    "vacuum.pause": ("Pausing the {name}.",),
    "vacuum.return_to_base": ("Sending the {name} back to its dock.",),
}

_MINUTES = (5, 10, 15, 20, 30, 45)
_TEMPERATURES = (18, 19, 20, 21, 22, 23, 24, 25, 26)
_HUMIDITIES = (30, 35, 40, 45, 50, 55, 60)
_HVAC_MODES = ("heat", "cool", "auto", "dry")
_FAN_MODES = ("low", "medium", "high", "auto")
_ITEMS = ("milk", "eggs", "bread", "coffee", "batteries", "apples")
_FREE_STATES = {"timer": ("idle", "active"), "climate": ("auto", "heat", "cool", "off"),
                "todo": ("idle",)}


@dataclass(frozen=True)
class ClassSpec:
    service: str
    weight: int
    test_eligible: bool


# Weights follow the reference corpus shape (scaled down); classes whose gold
# action carries parameters never appear on the test side of a split.
CLASS_SPECS: tuple[ClassSpec, ...] = tuple(
    ClassSpec(service, weight, eligible)
    for service, weight, eligible in (
        ("climate.set_fan_mode", 11, False),
        ("climate.set_humidity", 11, False),
        ("climate.set_hvac_mode", 11, False),
        ("climate.set_temperature", 10, False),
        ("cover.close", 4, True),
        ("cover.open", 4, True),
        ("cover.stop", 3, True),
        ("cover.toggle", 4, True),
        ("fan.decrease_speed", 4, True),
        ("fan.increase_speed", 3, True),
        ("fan.toggle", 4, True),
        ("fan.turn_off", 4, True),
        ("fan.turn_on", 4, True),
        ("light.toggle", 5, True),
        ("light.turn_off", 25, True),
        ("light.turn_on", 119, True),
        ("lock.lock", 2, True),
        ("lock.unlock", 2, True),
        ("media_player.media_next_track", 1, True),
        ("media_player.media_pause", 1, True),
        ("media_player.media_play", 1, True),
        ("media_player.media_previous_track", 1, True),
        ("media_player.media_stop", 1, True),
        ("media_player.turn_off", 1, True),
        ("media_player.turn_on", 1, True),
        ("media_player.volume_down", 1, True),
        ("media_player.volume_mute", 1, True),
        ("media_player.volume_up", 1, True),
        ("switch.toggle", 3, True),
        ("switch.turn_off", 5, True),
        ("switch.turn_on", 6, True),
        ("timer.cancel", 6, False),
        ("timer.start", 6, False),
        ("todo.add_item", 16, False),
        ("vacuum.pause", 1, False),
        ("vacuum.return_to_base", 2, False),
        ("vacuum.start", 4, True),
        ("vacuum.stop", 1, False),
    )
)

TEST_ELIGIBLE_CLASSES = frozenset(spec.service for spec in CLASS_SPECS if spec.test_eligible)

# Classes whose gold action carries parameters; all are test-ineligible.
PARAM_CLASSES = frozenset(
    sig.canonical for sig in builtin_catalog() if sig.params
) & frozenset(spec.service for spec in CLASS_SPECS)


def _template_key(service: str) -> str:
    name = service.split(".", 1)[1]
    if service in _UTTERANCES:
        return service
    return name  # turn_on / turn_off / toggle shared across domains


def _pick_params(service: str, rng: random.Random) -> tuple[dict, dict]:
    """Returns (gold params, template slot values)."""
    name = service.split(".", 1)[1]
    if service == "timer.start":
        minutes = rng.choice(_MINUTES)
        return {"duration": f"00:{minutes:02d}:00"}, {"minutes": minutes}
    if name == "set_temperature":
        value = rng.choice(_TEMPERATURES)
        return {"temperature": float(value)}, {"temperature": value}
    if name == "set_humidity":
        value = rng.choice(_HUMIDITIES)
        return {"humidity": float(value)}, {"humidity": value}
    if name == "set_hvac_mode":
        mode = rng.choice(_HVAC_MODES)
        return {"hvac_mode": mode}, {"hvac_mode": mode}
    if name == "set_fan_mode":
        mode = rng.choice(_FAN_MODES)
        return {"fan_mode": mode}, {"fan_mode": mode}
    if service == "todo.add_item":
        item = rng.choice(_ITEMS)
        return {"item": item}, {"item": item}
    return {}, {}


def _random_state(domain: str, rng: random.Random) -> DeviceState:
    legal = legal_states(domain)
    if legal is not None:
        primary = rng.choice(sorted(legal))
    else:
        primary = rng.choice(_FREE_STATES.get(domain, ("idle",)))
    attrs = {}
    if domain == "media_player" and rng.random() < 0.5:
        attrs["vol"] = round(rng.uniform(0.0, 1.0), 2)
    return DeviceState(primary, attrs)


def _build_registry(target_id: str, rng: random.Random) -> DeviceRegistry:
    others = [pair for pairs in _FLEET.values() for pair in pairs if pair[0] != target_id]
    rng.shuffle(others)
    chosen = others[: rng.randint(2, 5)]
    target_pair = next(p for pairs in _FLEET.values() for p in pairs if p[0] == target_id)
    chosen.insert(rng.randint(0, len(chosen)), target_pair)
    registry = DeviceRegistry()
    for entity, friendly in chosen:
        eid = parse_entity_id(entity)
        registry.add(Device(eid, friendly, _random_state(eid.domain, rng)))
    return registry


def _action_block(service: str, device: str, params: dict, rng: random.Random) -> str:
    obj: dict = {"service": service}
    obj["device" if rng.random() < 0.1 else "target_device"] = device
    obj.update(params)
    if rng.random() < 0.1:
        body = json.dumps(obj, indent=2)
    else:
        body = json.dumps(obj)
    return f"```homeassistant\n{body}\n```"


def generate_records(count: int, seed: int = 0) -> list[list[dict]]:
    """Produce `count` conversation records, a pure function of the seed."""
    rng = random.Random(seed)
    catalog = builtin_catalog()
    specs = list(CLASS_SPECS)
    weights = [spec.weight for spec in specs]
    records = []
    for _ in range(count):
        spec = rng.choices(specs, weights=weights, k=1)[0]
        domain = spec.service.split(".", 1)[0]
        target_id, friendly = rng.choice(_FLEET[domain])
        params, slots = _pick_params(spec.service, rng)
        slots = {**slots, "name": friendly.lower()}
        utterance = rng.choice(_UTTERANCES[_template_key(spec.service)]).format(**slots)
        if rng.random() < 0.2:
            utterance += rng.choice((" please", " now", " thanks"))
        response = rng.choice(_RESPONSES[_template_key(spec.service)]).format(
            **{**slots, "name": friendly}
        )
        registry = _build_registry(target_id, rng)
        system_text = render_system_prompt(SystemContext(catalog, registry))
        assistant = response + "\n" + _action_block(spec.service, target_id, params, rng)
        records.append(
            [
                {"from": "system", "value": system_text},
                {"from": "user", "value": utterance},
                {"from": "assistant", "value": assistant},
            ]
        )
    return records


def write_corpus(records: list[list[dict]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, ensure_ascii=False, indent=1)
        fh.write("\n")


def eligible_test_counts(class_sizes: dict[str, int], fraction: float) -> dict[str, int]:
    """Per-class test quota: fraction of each test-eligible class, floored."""
    return {
        label: int(size * fraction) if label in TEST_ELIGIBLE_CLASSES else 0
        for label, size in class_sizes.items()
    }
