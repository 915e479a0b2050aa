"""Bundled 13x7 target rooms used as experiment anchors."""
from __future__ import annotations

from importlib import resources

from .room import Room, decode_room


def _load(name: str) -> Room:
    text = resources.files("dungeonqd.data").joinpath(name).read_text()
    return decode_room(text)


def basic_room() -> Room:
    """Mostly open room: two doors, light wall accents, a few encounters."""
    return _load("basic_room.txt")


def complex_room() -> Room:
    """Three walled-off sections joined along the door corridor."""
    return _load("complex_room.txt")
