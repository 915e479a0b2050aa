"""Adaptive room fitness: equal blend of inventorial and spatial quality.

The fitness tracks the designer's current edit. A FitnessContext snapshots
everything derived from the target room (ratios, chamber coverage, the
micro-pattern profile) and is swapped atomically when the target changes,
so evaluation stays a pure function of (room, report, context).
"""
from __future__ import annotations

from dataclasses import dataclass

from . import dimensions
from .patterns import PatternReport, detect
from .room import Room, TileKind, neighbor_table


def door_safety(room: Room) -> float:
    """Mean over doors of the normalized walk distance to the nearest enemy.

    Distances are BFS over passable tiles, scaled by half the room
    perimeter span; doors with no reachable enemy score 1.
    """
    enemy = [i for i, t in enumerate(room.tiles) if t == TileKind.ENEMY]
    if not enemy:
        return 1.0
    norm = (room.cols + room.rows) / 2.0
    table = neighbor_table(room.cols, room.rows)
    tiles = room.tiles
    total = 0.0
    for x, y in room.doors:
        start = y * room.cols + x
        seen = bytearray(len(tiles))
        seen[start] = 1
        frontier = [start]
        dist = 0
        found = None
        while frontier and found is None:
            dist += 1
            nxt = []
            for i in frontier:
                for j in table[i]:
                    if not seen[j] and tiles[j] != TileKind.WALL:
                        if tiles[j] == TileKind.ENEMY:
                            found = dist
                            break
                        seen[j] = 1
                        nxt.append(j)
                if found is not None:
                    break
            frontier = nxt
        total += 1.0 if found is None else min(1.0, found / norm)
    return total / len(room.doors)


def ratio_closeness(value: float, target: float) -> float:
    """Relative agreement of two ratios: min/max, with 0/0 counting as equal."""
    if value == 0.0 and target == 0.0:
        return 1.0
    hi = max(value, target)
    return min(value, target) / hi


def placement_overlap(cells: set[int], target_cells: frozenset[int]) -> float:
    """Jaccard overlap of two tile sets; two empty sets agree perfectly."""
    if not cells and not target_cells:
        return 1.0
    union = len(cells | target_cells)
    return len(cells & target_cells) / union


def chamber_coverage(report: PatternReport, room: Room) -> float:
    passable = len(room.tiles) - room.tiles.count(TileKind.WALL)
    inside = sum(len(p.cells) for p in report.spatial if p.kind == "chamber")
    return inside / passable


@dataclass(frozen=True)
class FitnessValue:
    total: float
    inventorial: float
    spatial: float


def _meso_rate(report: PatternReport) -> float:
    chambers = sum(1 for p in report.spatial if p.kind == "chamber")
    return min(1.0, len(report.meso) / max(1, chambers))


def chamber_mask(report: PatternReport) -> bytes:
    """Per-cell flag: is this tile inside some chamber?"""
    mask = bytearray(len(report.pattern_index))
    for pattern in report.spatial:
        if pattern.kind == "chamber":
            for cell in pattern.cells:
                mask[cell] = 1
    return bytes(mask)


def _loose_ratio(report: PatternReport, room: Room) -> float:
    passable = len(room.tiles) - room.tiles.count(TileKind.WALL)
    loose = sum(len(p.cells) for p in report.spatial if p.kind in ("connector", "nothing"))
    return loose / passable


@dataclass(frozen=True)
class FitnessContext:
    target: Room
    target_report: PatternReport
    enemy_ratio: float
    treasure_ratio: float
    passable_ratio: float
    enemy_cells: frozenset[int]
    treasure_cells: frozenset[int]
    coverage: float
    chamber_cells: bytes
    meso_rate: float
    loose_ratio: float
    micro_profile: dict[TileKind, tuple[float, float]]
    leniency_weights: tuple[float, float, float] = dimensions.DEFAULT_LENIENCY_WEIGHTS

    @classmethod
    def from_target(
        cls,
        target: Room,
        leniency_weights: tuple[float, float, float] = dimensions.DEFAULT_LENIENCY_WEIGHTS,
    ) -> "FitnessContext":
        report = detect(target)
        passable = len(target.tiles) - target.tiles.count(TileKind.WALL)
        return cls(
            target=target,
            target_report=report,
            enemy_ratio=target.count(TileKind.ENEMY) / passable,
            treasure_ratio=target.count(TileKind.TREASURE) / passable,
            passable_ratio=passable / len(target.tiles),
            enemy_cells=frozenset(target.indices_of(TileKind.ENEMY)),
            treasure_cells=frozenset(target.indices_of(TileKind.TREASURE)),
            coverage=chamber_coverage(report, target),
            chamber_cells=chamber_mask(report),
            meso_rate=_meso_rate(report),
            loose_ratio=_loose_ratio(report, target),
            micro_profile=dimensions.micro_profile(report, target),
            leniency_weights=leniency_weights,
        )


def evaluate(
    room: Room,
    report: PatternReport,
    ctx: FitnessContext,
    safety: float | None = None,
) -> FitnessValue:
    """Eq-style blend: total = 1/2 inventorial + 1/2 spatial, all in [0, 1]."""
    if safety is None:
        safety = door_safety(room)
    passable = len(room.tiles) - room.tiles.count(TileKind.WALL)

    # Inventorial quality: the right amount of content in the right places,
    # plus safe entry points.
    enemies = set(room.indices_of(TileKind.ENEMY))
    treasures = set(room.indices_of(TileKind.TREASURE))
    enemy_term = 0.5 * ratio_closeness(len(enemies) / passable, ctx.enemy_ratio) + (
        0.5 * placement_overlap(enemies, ctx.enemy_cells)
    )
    treasure_term = 0.5 * ratio_closeness(len(treasures) / passable, ctx.treasure_ratio) + (
        0.5 * placement_overlap(treasures, ctx.treasure_cells)
    )
    inventorial = (enemy_term + treasure_term + safety) / 3.0

    # All three spatial terms track the target's structure, so rooms laid
    # out like the current design score highest: chambers in the same
    # places, the same meso-pattern rate, the same share of loose tiles.
    mask = chamber_mask(report)
    agree = sum(1 for a, b in zip(mask, ctx.chamber_cells) if a == b)
    placement_term = agree / len(mask)
    meso_term = 1.0 - abs(_meso_rate(report) - ctx.meso_rate)
    loose_term = 1.0 - abs(_loose_ratio(report, room) - ctx.loose_ratio)
    spatial = (placement_term + meso_term + loose_term) / 3.0

    return FitnessValue(
        total=0.5 * inventorial + 0.5 * spatial,
        inventorial=inventorial,
        spatial=spatial,
    )


def score_room(
    room: Room, report: PatternReport, ctx: FitnessContext, safety: float | None = None
) -> tuple[tuple[float, ...], FitnessValue]:
    """Seven dimension scores plus fitness, sharing one door-safety pass."""
    if safety is None:
        safety = door_safety(room)
    scores = dimensions.score_all(
        room,
        report,
        target=ctx.target,
        target_profile=ctx.micro_profile,
        door_safety=safety,
        weights=ctx.leniency_weights,
    )
    return scores, evaluate(room, report, ctx, safety)
