"""Tile-grid room representation, feasibility tests and serialization.

Rooms are immutable rectangular grids of tiles. A room always carries at
least one door on its border; doors are fixed inputs (they come from the
dungeon graph or from CLI flags) and are never touched by evolution.

Coordinates are (x, y) with x the column and y the row; the tile array is
row-major, so index = y * cols + x.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import Iterable, Sequence

MIN_SIDE = 3
MAX_SIDE = 20


class TileKind(IntEnum):
    FLOOR = 0
    WALL = 1
    TREASURE = 2
    ENEMY = 3
    DOOR = 4


TILE_CHARS = {
    TileKind.FLOOR: "f",
    TileKind.WALL: "w",
    TileKind.TREASURE: "t",
    TileKind.ENEMY: "e",
    TileKind.DOOR: "d",
}
CHAR_TILES = {c: k for k, c in TILE_CHARS.items()}

# Every tile except walls can be walked on.
PASSABLE = frozenset((TileKind.FLOOR, TileKind.TREASURE, TileKind.ENEMY, TileKind.DOOR))


class RoomError(ValueError):
    """Base class for room construction/parse failures."""


class GridSizeError(RoomError):
    """Grid dimensions are out of range or do not match the header."""


class TileCharError(RoomError):
    """The text grid contains a character outside f/w/t/e/d."""


class DoorPlacementError(RoomError):
    """Doors are missing, off the border, or inconsistent with the grid."""


@lru_cache(maxsize=None)
def neighbor_table(cols: int, rows: int) -> tuple[tuple[int, ...], ...]:
    """4-neighbor index lists for every cell of a cols x rows grid."""
    table = []
    for y in range(rows):
        for x in range(cols):
            adj = []
            if x > 0:
                adj.append(y * cols + x - 1)
            if x < cols - 1:
                adj.append(y * cols + x + 1)
            if y > 0:
                adj.append((y - 1) * cols + x)
            if y < rows - 1:
                adj.append((y + 1) * cols + x)
            table.append(tuple(adj))
    return tuple(table)


@dataclass(frozen=True)
class Room:
    """An immutable tile-grid room.

    tiles is a bytes object of TileKind values, one per cell, row-major.
    doors are border coordinates sorted by (y, x); locked is the set of
    coordinates whose tiles are pinned to the designer's layout.
    """

    cols: int
    rows: int
    tiles: bytes
    doors: tuple[tuple[int, int], ...]
    locked: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not (MIN_SIDE <= self.cols <= MAX_SIDE and MIN_SIDE <= self.rows <= MAX_SIDE):
            raise GridSizeError(
                f"room must be between {MIN_SIDE}x{MIN_SIDE} and {MAX_SIDE}x{MAX_SIDE}, "
                f"got {self.cols}x{self.rows}"
            )
        if len(self.tiles) != self.cols * self.rows:
            raise GridSizeError(
                f"tile array has {len(self.tiles)} cells, expected {self.cols * self.rows}"
            )
        if any(t > TileKind.DOOR for t in self.tiles):
            raise TileCharError("tile array contains an unknown tile value")
        object.__setattr__(self, "doors", tuple(sorted(self.doors, key=lambda c: (c[1], c[0]))))
        if not self.doors:
            raise DoorPlacementError("room needs at least one door")
        door_set = set()
        for x, y in self.doors:
            if not self.in_bounds(x, y):
                raise DoorPlacementError(f"door {(x, y)} outside the grid")
            if not self.on_border(x, y):
                raise DoorPlacementError(f"door {(x, y)} is not on the border")
            if self.tiles[y * self.cols + x] != TileKind.DOOR:
                raise DoorPlacementError(f"tile at door {(x, y)} is not a door tile")
            door_set.add((x, y))
        for i, t in enumerate(self.tiles):
            if t == TileKind.DOOR and (i % self.cols, i // self.cols) not in door_set:
                raise DoorPlacementError(
                    f"door tile at {(i % self.cols, i // self.cols)} missing from door list"
                )
        object.__setattr__(self, "locked", frozenset(self.locked))
        for x, y in self.locked:
            if not self.in_bounds(x, y):
                raise GridSizeError(f"locked coordinate {(x, y)} outside the grid")

    # -- geometry helpers ------------------------------------------------

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.cols and 0 <= y < self.rows

    def on_border(self, x: int, y: int) -> bool:
        return x in (0, self.cols - 1) or y in (0, self.rows - 1)

    def index(self, x: int, y: int) -> int:
        return y * self.cols + x

    def tile(self, x: int, y: int) -> TileKind:
        return TileKind(self.tiles[y * self.cols + x])

    def coord(self, index: int) -> tuple[int, int]:
        return index % self.cols, index // self.cols

    # -- derived views ---------------------------------------------------

    def passable_indices(self) -> list[int]:
        return [i for i, t in enumerate(self.tiles) if t != TileKind.WALL]

    def indices_of(self, kind: TileKind) -> list[int]:
        return [i for i, t in enumerate(self.tiles) if t == kind]

    def count(self, kind: TileKind) -> int:
        return self.tiles.count(kind)

    def with_tiles(self, tiles: bytes) -> "Room":
        return Room(self.cols, self.rows, tiles, self.doors, self.locked)

    def with_locked(self, locked: Iterable[tuple[int, int]]) -> "Room":
        return Room(self.cols, self.rows, self.tiles, self.doors, frozenset(locked))

    def rows_as_text(self) -> list[str]:
        out = []
        for y in range(self.rows):
            row = self.tiles[y * self.cols : (y + 1) * self.cols]
            out.append("".join(TILE_CHARS[TileKind(t)] for t in row))
        return out


def make_room(
    rows_text: Sequence[str],
    locked: Iterable[tuple[int, int]] = (),
) -> Room:
    """Build a Room from grid lines; doors are read from the 'd' cells."""
    rows = len(rows_text)
    cols = len(rows_text[0]) if rows else 0
    tiles = bytearray()
    doors = []
    for y, line in enumerate(rows_text):
        if len(line) != cols:
            raise GridSizeError(f"row {y} has {len(line)} tiles, expected {cols}")
        for x, ch in enumerate(line):
            kind = CHAR_TILES.get(ch)
            if kind is None:
                raise TileCharError(f"illegal tile {ch!r} at {(x, y)}")
            tiles.append(kind)
            if kind == TileKind.DOOR:
                doors.append((x, y))
    return Room(cols, rows, bytes(tiles), tuple(doors), frozenset(locked))


def open_room(cols: int, rows: int, doors: Sequence[tuple[int, int]]) -> Room:
    """All-floor room with doors at the given border coordinates."""
    tiles = bytearray([TileKind.FLOOR]) * (cols * rows)
    for x, y in doors:
        tiles[y * cols + x] = TileKind.DOOR
    return Room(cols, rows, bytes(tiles), tuple(doors))


# -- feasibility ----------------------------------------------------------


def reachable_from(room: Room, start: int) -> bytearray:
    """BFS over passable tiles; returns a per-cell visited mask."""
    seen = bytearray(len(room.tiles))
    if room.tiles[start] == TileKind.WALL:
        return seen
    table = neighbor_table(room.cols, room.rows)
    tiles = room.tiles
    seen[start] = 1
    frontier = [start]
    while frontier:
        nxt = []
        for i in frontier:
            for j in table[i]:
                if not seen[j] and tiles[j] != TileKind.WALL:
                    seen[j] = 1
                    nxt.append(j)
        frontier = nxt
    return seen


def is_feasible(room: Room) -> bool:
    """A room is playable when every door, enemy and treasure is mutually
    reachable over passable tiles; stray floor pockets are tolerated."""
    first = room.doors[0]
    seen = reachable_from(room, room.index(*first))
    for x, y in room.doors:
        if not seen[room.index(x, y)]:
            return False
    for i, t in enumerate(room.tiles):
        if t in (TileKind.ENEMY, TileKind.TREASURE) and not seen[i]:
            return False
    return True


def connected_door_groups(room: Room) -> list[set[int]]:
    """Partition of door indices (into room.doors) by intra-room passable paths."""
    groups: list[set[int]] = []
    assigned: set[int] = set()
    for i, door in enumerate(room.doors):
        if i in assigned:
            continue
        seen = reachable_from(room, room.index(*door))
        group = {j for j, d in enumerate(room.doors) if seen[room.index(*d)]}
        assigned |= group
        groups.append(group)
    return groups


@dataclass(frozen=True)
class DungeonStub:
    """Minimal dungeon graph: rooms plus door-to-door connections.

    Each edge is (room_a, door_a, room_b, door_b) where the door values
    index into the respective room's door list.
    """

    rooms: tuple[Room, ...]
    edges: tuple[tuple[int, int, int, int], ...]
    initial_room: int = 0

    def __post_init__(self) -> None:
        if len(self.rooms) < 2:
            raise ValueError("a dungeon needs at least two rooms")
        if not self.edges:
            raise ValueError("a dungeon needs at least one connection")
        for ra, da, rb, db in self.edges:
            for r, d in ((ra, da), (rb, db)):
                if not 0 <= r < len(self.rooms):
                    raise ValueError(f"edge references missing room {r}")
                if not 0 <= d < len(self.rooms[r].doors):
                    raise ValueError(f"edge references missing door {d} of room {r}")
        if not 0 <= self.initial_room < len(self.rooms):
            raise ValueError("initial room index out of range")


def dungeon_reachability(dungeon: DungeonStub) -> set[int]:
    """Room indices that cannot be reached from the initial room.

    Traversal alternates dungeon edges with intra-room door-to-door paths.
    The player starts inside the initial room, so all of its doors seed the
    search. An empty result means the dungeon is feasible.
    """
    door_links: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for ra, da, rb, db in dungeon.edges:
        door_links.setdefault((ra, da), []).append((rb, db))
        door_links.setdefault((rb, db), []).append((ra, da))

    groups_per_room = [connected_door_groups(r) for r in dungeon.rooms]

    seen_doors: set[tuple[int, int]] = set()
    frontier = [(dungeon.initial_room, d) for d in range(len(dungeon.rooms[dungeon.initial_room].doors))]
    seen_doors.update(frontier)
    reached_rooms = {dungeon.initial_room}
    while frontier:
        nxt = []
        for node in frontier:
            room_i, door_i = node
            reached_rooms.add(room_i)
            for other in door_links.get(node, ()):
                if other not in seen_doors:
                    seen_doors.add(other)
                    nxt.append(other)
            for group in groups_per_room[room_i]:
                if door_i in group:
                    for sibling in group:
                        peer = (room_i, sibling)
                        if peer not in seen_doors:
                            seen_doors.add(peer)
                            nxt.append(peer)
                    break
        frontier = nxt
    return set(range(len(dungeon.rooms))) - reached_rooms


# -- text serialization ---------------------------------------------------


def encode_room(room: Room) -> str:
    """Room -> text: a `cols rows` header, the tile grid, then lock lines."""
    lines = [f"{room.cols} {room.rows}"]
    lines.extend(room.rows_as_text())
    for x, y in sorted(room.locked, key=lambda c: (c[1], c[0])):
        lines.append(f"lock {x} {y}")
    return "\n".join(lines) + "\n"


def decode_room(text: str) -> Room:
    """Inverse of encode_room; raises a RoomError subclass on bad input."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise GridSizeError("empty room text")
    header = lines[0].split()
    if len(header) != 2:
        raise GridSizeError(f"header must be 'cols rows', got {lines[0]!r}")
    try:
        cols, rows = int(header[0]), int(header[1])
    except ValueError as exc:
        raise GridSizeError(f"header must be 'cols rows', got {lines[0]!r}") from exc
    grid = lines[1 : 1 + rows]
    if len(grid) != rows:
        raise GridSizeError(f"expected {rows} grid rows, found {len(grid)}")
    for line in grid:
        if len(line) != cols:
            raise GridSizeError(f"grid row {line!r} does not have {cols} tiles")
    locked = []
    for extra in lines[1 + rows :]:
        parts = extra.split()
        if len(parts) != 3 or parts[0] != "lock":
            raise TileCharError(f"unexpected trailing line {extra!r}")
        locked.append((int(parts[1]), int(parts[2])))
    return make_room(grid, locked)


# -- JSON wire format (session protocol) ----------------------------------


def room_to_json(room: Room) -> dict:
    return {
        "cols": room.cols,
        "rows": room.rows,
        "tiles": room.rows_as_text(),
        "doors": [[x, y] for x, y in room.doors],
        "locked": sorted([[x, y] for x, y in room.locked], key=lambda c: (c[1], c[0])),
    }


def room_from_json(payload: dict) -> Room:
    try:
        tiles = payload["tiles"]
        cols = payload["cols"]
        rows = payload["rows"]
    except (TypeError, KeyError) as exc:
        raise GridSizeError(f"room payload missing field: {exc}") from exc
    if len(tiles) != rows or any(len(r) != cols for r in tiles):
        raise GridSizeError("tiles do not match cols/rows")
    locked = [(int(x), int(y)) for x, y in payload.get("locked", [])]
    room = make_room(tiles, locked)
    doors = sorted((int(x), int(y)) for x, y in payload.get("doors", []))
    if doors and doors != sorted(room.doors):
        raise DoorPlacementError("door list does not match door tiles in the grid")
    return room
