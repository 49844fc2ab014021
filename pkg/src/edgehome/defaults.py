"""Built-in service catalogs and the default demo home.

The default home is the six-device setup used throughout the docs and tests:
a speaker, an oven timer, a cabinet lock, bedroom blinds, a vacuum, and a
light switch, controllable through a 28-service catalog. The wider builtin
catalog adds the remaining domains (light, fan, climate, todo) that appear
as dataset class labels.
"""

from .model import Device, DeviceRegistry, DeviceState, EntityId, ServiceCatalog, ServiceSignature

DEFAULT_PREAMBLE = (
    "You are 'Al', a helpful AI Assistant that controls the devices in a house. "
    "Complete the following task as instructed or answer the following question "
    "with the information provided only."
)

FALLBACK_TEXT = "Sorry, I couldn't complete that request."

# Service set advertised by the default home's system prompt.
_DEFAULT_SERVICES: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("cover.close_cover", ()),
    ("cover.open_cover", ()),
    ("cover.stop_cover", ()),
    ("cover.toggle", ()),
    ("lock.lock", ()),
    ("lock.unlock", ()),
    ("media_player.media_next_track", ()),
    ("media_player.media_pause", ()),
    ("media_player.media_play", ()),
    ("media_player.media_play_pause", ()),
    ("media_player.media_previous_track", ()),
    ("media_player.media_stop", ()),
    ("media_player.toggle", ()),
    ("media_player.turn_off", ()),
    ("media_player.turn_on", ()),
    ("media_player.volume_down", ()),
    ("media_player.volume_mute", ()),
    ("media_player.volume_up", ()),
    ("switch.toggle", ()),
    ("switch.turn_off", ()),
    ("switch.turn_on", ()),
    ("timer.cancel", ()),
    ("timer.pause", ()),
    ("timer.start", ("duration",)),
    ("vacuum.pause", ()),
    ("vacuum.return_to_base", ()),
    ("vacuum.start", ()),
    ("vacuum.stop", ()),
)

# Additional services that occur as dataset class labels but are not part of
# the default home's prompt (short cover spellings included).
_EXTRA_SERVICES: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("climate.set_fan_mode", ("fan_mode",)),
    ("climate.set_humidity", ("humidity",)),
    ("climate.set_hvac_mode", ("hvac_mode",)),
    ("climate.set_temperature", ("temperature",)),
    ("cover.close", ()),
    ("cover.open", ()),
    ("cover.stop", ()),
    ("fan.decrease_speed", ()),
    ("fan.increase_speed", ()),
    ("fan.toggle", ()),
    ("fan.turn_off", ()),
    ("fan.turn_on", ()),
    ("light.toggle", ()),
    ("light.turn_off", ()),
    ("light.turn_on", ()),
    ("todo.add_item", ("item",)),
)


def _signature(canonical: str, params: tuple[str, ...]) -> ServiceSignature:
    domain, name = canonical.split(".")
    return ServiceSignature(domain, name, params)


def default_catalog() -> ServiceCatalog:
    """The 28-service catalog advertised by the default home."""
    return ServiceCatalog([_signature(c, p) for c, p in _DEFAULT_SERVICES])


def builtin_catalog() -> ServiceCatalog:
    """Every service the simulator ships transition effects for."""
    merged = sorted(_DEFAULT_SERVICES + _EXTRA_SERVICES)
    return ServiceCatalog([_signature(c, p) for c, p in merged])


def default_home() -> DeviceRegistry:
    """Six demo devices covering most domains, in prompt order."""
    return DeviceRegistry([
        Device(
            EntityId("media_player", "harman_kardon_aura"),
            "Harman Kardon Glass Speaker",
            DeviceState("standby", {"vol": 0.88}),
        ),
        Device(
            EntityId("timer", "kitchen_oven"),
            "Kitchen oven timer",
            DeviceState("active"),
        ),
        Device(
            EntityId("lock", "office_cabinet"),
            "Office cabinet lock",
            DeviceState("unlocked"),
        ),
        Device(
            EntityId("cover", "master_bedroom"),
            "Master Bedroom",
            DeviceState("closed"),
        ),
        Device(
            EntityId("vacuum", "hallway_neato"),
            "Hallway path cleaner",
            DeviceState("docked"),
        ),
        Device(
            EntityId("switch", "basement_lights"),
            "Basement Lights Switch",
            DeviceState("off"),
        ),
    ])
