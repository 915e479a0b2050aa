"""Micro-, spatial- and meso-pattern detection over rooms.

Passable tiles are partitioned into spatial patterns: chambers (filled
rectangles of at least 3x3), corridors (1-wide straight runs), connectors
(single tiles joining two or more patterns) and nothing (each leftover
tile on its own).
Micro-patterns are 4-connected clusters of same-kind tiles; meso-patterns
classify chambers by their enemy/treasure content.

Detection is deterministic: chambers are extracted greedily largest-area
first with ties resolved in scan order, and every later stage walks the
grid in row-major order. Cells are stored as flat row-major indices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .room import Room, TileKind, neighbor_table

CHAMBER_MIN_SIDE = 3

MICRO_KINDS = (TileKind.ENEMY, TileKind.TREASURE, TileKind.WALL)
MICRO_NAMES = {TileKind.ENEMY: "enemy", TileKind.TREASURE: "treasure", TileKind.WALL: "wall"}


@dataclass(frozen=True)
class MicroCluster:
    kind: TileKind
    cells: tuple[int, ...]

    def centroid(self, cols: int) -> tuple[float, float]:
        n = len(self.cells)
        sx = sum(i % cols for i in self.cells)
        sy = sum(i // cols for i in self.cells)
        return sx / n, sy / n


@dataclass(frozen=True)
class SpatialPattern:
    kind: str  # chamber | corridor | connector | nothing
    cells: tuple[int, ...]


@dataclass(frozen=True)
class MesoPattern:
    kind: str  # treasure_room | guard_room | ambush
    chamber: int  # index into PatternReport.spatial


@dataclass(frozen=True)
class PatternReport:
    micro: tuple[MicroCluster, ...]
    spatial: tuple[SpatialPattern, ...]
    meso: tuple[MesoPattern, ...]
    adjacency: tuple[tuple[int, ...], ...]  # sorted neighbor ids per spatial pattern
    pattern_index: tuple[int, ...]  # per cell; -1 for walls

    def chambers(self) -> list[int]:
        return [i for i, p in enumerate(self.spatial) if p.kind == "chamber"]

    def door_patterns(self, room: Room) -> list[int]:
        """Ids of spatial patterns that contain a door tile."""
        ids = []
        for x, y in room.doors:
            pid = self.pattern_index[y * room.cols + x]
            if pid >= 0 and pid not in ids:
                ids.append(pid)
        return ids

    def clusters_of(self, kind: TileKind) -> list[MicroCluster]:
        return [c for c in self.micro if c.kind == kind]


def cluster_micro(room: Room, kind: TileKind) -> list[MicroCluster]:
    """Maximal 4-connected clusters of tiles of the given kind (distance 1)."""
    if kind not in MICRO_KINDS:
        raise ValueError(f"unsupported micro-pattern kind {kind!r}")
    table = neighbor_table(room.cols, room.rows)
    tiles = room.tiles
    seen = bytearray(len(tiles))
    clusters = []
    for start, t in enumerate(tiles):
        if t != kind or seen[start]:
            continue
        seen[start] = 1
        members = [start]
        frontier = [start]
        while frontier:
            nxt = []
            for i in frontier:
                for j in table[i]:
                    if not seen[j] and tiles[j] == kind:
                        seen[j] = 1
                        members.append(j)
                        nxt.append(j)
            frontier = nxt
        clusters.append(MicroCluster(kind, tuple(sorted(members))))
    return clusters


def _best_rectangle(free: bytearray, cols: int, rows: int) -> tuple[int, int, int, int] | None:
    """Largest filled rectangle of free cells with both sides >= 3.

    Returns (top, left, height, width); ties go to the smaller top, then the
    smaller left, then the taller shape. Uses the histogram-stack sweep, which
    visits every maximal rectangle once per base row.
    """
    if free.count(1) < CHAMBER_MIN_SIDE * CHAMBER_MIN_SIDE:
        return None
    best = None
    best_key = None
    heights = [0] * cols
    stack_left: list[int] = []
    stack_h: list[int] = []
    for y in range(rows):
        base = y * cols
        for x in range(cols):
            heights[x] = heights[x] + 1 if free[base + x] else 0
        for x in range(cols + 1):
            h = heights[x] if x < cols else 0
            left = x
            while stack_h and stack_h[-1] >= h:
                sh = stack_h.pop()
                l = stack_left.pop()
                width = x - l
                if sh >= CHAMBER_MIN_SIDE and width >= CHAMBER_MIN_SIDE:
                    key = (-(sh * width), y - sh + 1, l, -sh)
                    if best_key is None or key < best_key:
                        best_key = key
                        best = (y - sh + 1, l, sh, width)
                left = l
            if h and (not stack_h or stack_h[-1] < h):
                stack_left.append(left)
                stack_h.append(h)
    return best


def detect(room: Room) -> PatternReport:
    """Full pattern analysis of a room; deterministic for a given layout."""
    cols, rows = room.cols, room.rows
    n = cols * rows
    tiles = room.tiles
    table = neighbor_table(cols, rows)

    free = bytearray(1 if t != TileKind.WALL else 0 for t in tiles)
    pattern_of = [-1] * n
    spatial: list[SpatialPattern] = []

    # Chambers: greedy largest-first extraction of filled rectangles.
    while True:
        rect = _best_rectangle(free, cols, rows)
        if rect is None:
            break
        top, left, height, width = rect
        cells = []
        for y in range(top, top + height):
            base = y * cols
            for x in range(left, left + width):
                free[base + x] = 0
                pattern_of[base + x] = len(spatial)
                cells.append(base + x)
        spatial.append(SpatialPattern("chamber", tuple(cells)))

    # Corridors: straight runs of thin leftover cells (no 2x2 free block).
    thin = bytearray(n)
    for i in range(n):
        if not free[i]:
            continue
        x, y = i % cols, i // cols
        in_square = False
        for x0 in (x - 1, x):
            for y0 in (y - 1, y):
                if 0 <= x0 < cols - 1 and 0 <= y0 < rows - 1:
                    b = y0 * cols + x0
                    if free[b] and free[b + 1] and free[b + cols] and free[b + cols + 1]:
                        in_square = True
        thin[i] = 0 if in_square else 1

    def run_len(i: int, step: int, limit: int) -> int:
        count = 0
        j = i + step
        while limit > 0 and free[j] and thin[j]:
            count += 1
            j += step
            limit -= 1
        return count

    for i in range(n):
        if not (free[i] and thin[i]):
            continue
        x, y = i % cols, i // cols
        lefts = run_len(i, -1, x)
        rights = run_len(i, 1, cols - 1 - x)
        ups = run_len(i, -cols, y)
        downs = run_len(i, cols, rows - 1 - y)
        hlen = lefts + rights + 1
        vlen = ups + downs + 1
        if max(hlen, vlen) < 2:
            continue
        if hlen >= vlen:
            cells = [i + d for d in range(-lefts, rights + 1)]
        else:
            cells = [i + d * cols for d in range(-ups, downs + 1)]
        for c in cells:
            free[c] = 0
            pattern_of[c] = len(spatial)
        spatial.append(SpatialPattern("corridor", tuple(sorted(cells))))

    # Connectors: leftover tiles touching two or more existing patterns.
    connector_cells = []
    for i in range(n):
        if not free[i]:
            continue
        touching = {pattern_of[j] for j in table[i] if pattern_of[j] >= 0}
        if len(touching) >= 2:
            connector_cells.append(i)
    for i in connector_cells:
        free[i] = 0
        pattern_of[i] = len(spatial)
        spatial.append(SpatialPattern("connector", (i,)))

    # Nothing: every surviving tile stands alone, ungrouped.
    for i in range(n):
        if not free[i]:
            continue
        free[i] = 0
        pattern_of[i] = len(spatial)
        spatial.append(SpatialPattern("nothing", (i,)))

    # Adjacency between spatial patterns (shared 4-neighbor cells).
    neighbor_sets: list[set[int]] = [set() for _ in spatial]
    for i in range(n):
        a = pattern_of[i]
        if a < 0:
            continue
        x = i % cols
        if x + 1 < cols:
            b = pattern_of[i + 1]
            if b >= 0 and b != a:
                neighbor_sets[a].add(b)
                neighbor_sets[b].add(a)
        if i + cols < n:
            b = pattern_of[i + cols]
            if b >= 0 and b != a:
                neighbor_sets[a].add(b)
                neighbor_sets[b].add(a)
    adjacency = tuple(tuple(sorted(s)) for s in neighbor_sets)

    micro = []
    for kind in MICRO_KINDS:
        micro.extend(cluster_micro(room, kind))

    door_ids = set()
    for x, y in room.doors:
        pid = pattern_of[y * cols + x]
        if pid >= 0:
            door_ids.add(pid)

    meso = []
    for cid, pat in enumerate(spatial):
        if pat.kind != "chamber":
            continue
        enemies = [c for c in pat.cells if tiles[c] == TileKind.ENEMY]
        treasures = [c for c in pat.cells if tiles[c] == TileKind.TREASURE]
        near_door = any(
            pattern_of[j] in door_ids for c in enemies for j in table[c]
        )
        if treasures and enemies and near_door:
            meso.append(MesoPattern("ambush", cid))
        elif treasures and not enemies:
            meso.append(MesoPattern("treasure_room", cid))
        elif enemies and len(enemies) >= len(treasures):
            meso.append(MesoPattern("guard_room", cid))

    return PatternReport(
        micro=tuple(micro),
        spatial=tuple(spatial),
        meso=tuple(meso),
        adjacency=adjacency,
        pattern_index=tuple(pattern_of),
    )


def report_to_json(report: PatternReport, room: Room) -> dict:
    """Debug dump with (x, y) cell coordinates, for golden-file tests."""

    def coords(cells: Iterable[int]) -> list[list[int]]:
        return [[i % room.cols, i // room.cols] for i in cells]

    return {
        "micro": [
            {"kind": MICRO_NAMES[c.kind], "cells": coords(c.cells)} for c in report.micro
        ],
        "spatial": [
            {"id": i, "kind": p.kind, "cells": coords(p.cells)}
            for i, p in enumerate(report.spatial)
        ],
        "meso": [{"kind": m.kind, "chamber": m.chamber} for m in report.meso],
        "adjacency": [list(nbrs) for nbrs in report.adjacency],
    }
