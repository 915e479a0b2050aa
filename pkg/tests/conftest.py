import random

import pytest

from dungeonqd.presets import basic_room, complex_room
from dungeonqd.room import Room, TileKind


@pytest.fixture
def basic():
    return basic_room()


@pytest.fixture
def complex_target():
    return complex_room()


def random_room(
    rng: random.Random,
    cols: int = 13,
    rows: int = 7,
    wall_p: float = 0.30,
    treasure_p: float = 0.06,
    enemy_p: float = 0.07,
) -> Room:
    """Random room with doors mid-left and mid-right."""
    doors = ((0, rows // 2), (cols - 1, rows // 2))
    door_idx = {y * cols + x for x, y in doors}
    tiles = bytearray()
    for i in range(cols * rows):
        if i in door_idx:
            tiles.append(TileKind.DOOR)
            continue
        roll = rng.random()
        if roll < wall_p:
            tiles.append(TileKind.WALL)
        elif roll < wall_p + treasure_p:
            tiles.append(TileKind.TREASURE)
        elif roll < wall_p + treasure_p + enemy_p:
            tiles.append(TileKind.ENEMY)
        else:
            tiles.append(TileKind.FLOOR)
    return Room(cols, rows, bytes(tiles), doors)


@pytest.fixture
def rng():
    return random.Random(1234)
