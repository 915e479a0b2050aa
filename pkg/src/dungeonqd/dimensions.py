"""The seven behavioral dimensions and archive binning.

Every dimension maps a room (plus its pattern report and, for the
similarity-style measures, the designer's target) to a score in [0, 1].
Scores are independent of fitness; the archive uses their binned values
as cell coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .patterns import MICRO_KINDS, MicroCluster, PatternReport
from .room import Room, TileKind, neighbor_table

DIMENSION_NAMES = (
    "symmetry",
    "similarity",
    "nmp",
    "nsp",
    "linearity",
    "inner_similarity",
    "leniency",
)
DIMENSION_INDEX = {name: i for i, name in enumerate(DIMENSION_NAMES)}

NSP_SIDE_FACTOR = 4.0
DENSITY_THRESHOLDS = {TileKind.ENEMY: 4, TileKind.TREASURE: 4, TileKind.WALL: 6}
SIMPLE_PATH_CAP = 1000

DEFAULT_LENIENCY_WEIGHTS = (0.4, 0.4, 0.2)


@dataclass(frozen=True)
class DimensionDescriptor:
    kind: str
    granularity: int = 5

    def __post_init__(self) -> None:
        if self.kind not in DIMENSION_INDEX:
            raise ValueError(f"unknown dimension {self.kind!r}; expected one of {DIMENSION_NAMES}")
        if self.granularity < 2:
            raise ValueError("granularity must be at least 2")


def bin_index(score: float, granularity: int) -> int:
    """Bin i covers [i/g, (i+1)/g); the last bin is closed at 1.0."""
    g = granularity
    b = min(g - 1, max(0, int(score * g)))
    while b + 1 <= g - 1 and (b + 1) / g <= score:
        b += 1
    while b > 0 and b / g > score:
        b -= 1
    return b


def _clamp01(v: float) -> float:
    return 0.0 if v < 0.0 else (1.0 if v > 1.0 else v)


# -- aesthetics ------------------------------------------------------------


def symmetry(room: Room) -> float:
    """Best wall mirror count over the four axes, over total walls.

    Diagonal axes are evaluated on the centered largest square sub-grid;
    a wall-free room is vacuously symmetric.
    """
    cols, rows = room.cols, room.rows
    walls = [(i % cols, i // cols) for i, t in enumerate(room.tiles) if t == TileKind.WALL]
    if not walls:
        return 1.0
    wall_set = set(walls)
    side = min(cols, rows)
    ox = (cols - side) // 2
    oy = (rows - side) // 2

    vertical = horizontal = diag_main = diag_anti = 0
    for x, y in walls:
        if (cols - 1 - x, y) in wall_set:
            vertical += 1
        if (x, rows - 1 - y) in wall_set:
            horizontal += 1
        u, v = x - ox, y - oy
        if 0 <= u < side and 0 <= v < side:
            if (ox + v, oy + u) in wall_set:
                diag_main += 1
            if (ox + side - 1 - v, oy + side - 1 - u) in wall_set:
                diag_anti += 1
    return max(vertical, horizontal, diag_main, diag_anti) / len(walls)


def similarity(room: Room, target: Room) -> float:
    """Tile-by-tile agreement with the target room."""
    if (room.cols, room.rows) != (target.cols, target.rows):
        raise ValueError("similarity requires rooms of identical dimensions")
    total = len(room.tiles)
    differing = sum(1 for a, b in zip(room.tiles, target.tiles) if a != b)
    return (total - differing) / total


# -- pattern counts --------------------------------------------------------


def max_chambers(room: Room) -> int:
    return (room.cols // 3) * (room.rows // 3)


def nmp(report: PatternReport, room: Room) -> float:
    return min(len(report.meso) / max_chambers(room), 1.0)


def nsp(report: PatternReport, room: Room) -> float:
    return min(len(report.spatial) / (max(room.cols, room.rows) * NSP_SIDE_FACTOR), 1.0)


PATH_STEP_BUDGET = 20_000


def count_simple_paths(
    adjacency: tuple[tuple[int, ...], ...],
    start: int,
    goal: int,
    cap: int = SIMPLE_PATH_CAP,
    step_budget: int = PATH_STEP_BUDGET,
) -> int:
    """Distinct simple paths between two nodes; counting stops at cap.

    Simple-path counting is exponential, so besides the path cap the DFS
    carries a step budget that bounds dead-end exploration on large pattern
    graphs. The budget never binds on graphs small enough for exhaustive
    enumeration (a few dozen nodes with the default cap).
    """
    if start == goal or cap <= 0:
        return 0
    count = 0
    steps = 0
    visited = [False] * len(adjacency)

    def walk(node: int) -> bool:
        nonlocal count, steps
        steps += 1
        if steps > step_budget:
            return True
        visited[node] = True
        for nxt in adjacency[node]:
            if nxt == goal:
                count += 1
                if count >= cap:
                    visited[node] = False
                    return True
            elif not visited[nxt]:
                if walk(nxt):
                    visited[node] = False
                    return True
        visited[node] = False
        return False

    walk(start)
    return count


def door_neighbor_count(report: PatternReport, room: Room) -> int:
    """Sum over doors of the number of distinct adjacent spatial patterns."""
    table = neighbor_table(room.cols, room.rows)
    total = 0
    for x, y in room.doors:
        seen = {
            report.pattern_index[j]
            for j in table[y * room.cols + x]
            if report.pattern_index[j] >= 0
        }
        total += len(seen)
    return total


def linearity(report: PatternReport, room: Room, cap: int = SIMPLE_PATH_CAP) -> float:
    """1 minus door-to-door path abundance in the pattern graph."""
    door_pats = report.door_patterns(room)
    denom = len(report.spatial) + door_neighbor_count(report, room)
    if not denom:
        return 1.0
    # Once paths >= denom the clamped score is 0, so counting may stop there.
    budget = min(cap, denom)
    paths = 0
    for i in range(len(door_pats)):
        for j in range(i + 1, len(door_pats)):
            paths += count_simple_paths(
                report.adjacency, door_pats[i], door_pats[j], budget - paths
            )
            if paths >= budget:
                return _clamp01(1.0 - paths / denom)
    return _clamp01(1.0 - paths / denom)


# -- micro-pattern distributions -------------------------------------------


def cluster_distance(a: MicroCluster, b: MicroCluster, cols: int) -> float:
    ax, ay = a.centroid(cols)
    bx, by = b.centroid(cols)
    return math.hypot(ax - bx, ay - by)


def density(clusters: list[MicroCluster], kind: TileKind) -> float:
    """Mean cluster saturation against the per-kind size threshold."""
    if not clusters:
        return 0.0
    theta = DENSITY_THRESHOLDS[kind]
    return sum(min(1.0, len(c.cells) / theta) for c in clusters) / len(clusters)


def sparsity(clusters: list[MicroCluster], room: Room) -> float:
    """Mean pairwise centroid distance, normalized by tile count."""
    k = len(clusters)
    if k < 2:
        return 0.0
    size = room.cols * room.rows
    centroids = [c.centroid(room.cols) for c in clusters]
    total = 0.0
    for i in range(k):
        ax, ay = centroids[i]
        for j in range(k):
            if i != j:
                bx, by = centroids[j]
                total += math.hypot(ax - bx, ay - by) / size
    return total / (k * (k - 1))


def micro_profile(report: PatternReport, room: Room) -> dict[TileKind, tuple[float, float]]:
    """Per micro-kind (density, sparsity) pair for a room."""
    profile = {}
    for kind in MICRO_KINDS:
        clusters = report.clusters_of(kind)
        profile[kind] = (density(clusters, kind), sparsity(clusters, room))
    return profile


def inner_similarity(
    report: PatternReport,
    room: Room,
    target_profile: dict[TileKind, tuple[float, float]],
    profile: dict[TileKind, tuple[float, float]] | None = None,
) -> float:
    """Distribution-level similarity to the target's micro-pattern profile.

    The raw measure is a distance in [0, 6] (six absolute differences);
    it is inverted and rescaled so 1.0 means identical distributions.
    """
    if profile is None:
        profile = micro_profile(report, room)
    distance = 0.0
    for kind in MICRO_KINDS:
        den_g, spa_g = profile[kind]
        den_t, spa_t = target_profile[kind]
        distance += abs(den_g - den_t) + abs(spa_g - spa_t)
    return max(0.0, 1.0 - distance / 6.0)


def _safe_log10(value: float) -> float:
    return math.log10(value) if value > 1.0 else 0.0


def leniency(
    room: Room,
    report: PatternReport,
    door_safety: float,
    weights: tuple[float, float, float] = DEFAULT_LENIENCY_WEIGHTS,
    profile: dict[TileKind, tuple[float, float]] | None = None,
) -> float:
    """Inverse challenge: enemy pressure net of treasure reward.

    Enemy count/distribution terms and unsafe doors raise the non-lenient
    load; treasures offset half their analogous load. Log terms floor at
    zero so empty rooms stay well defined.
    """
    if profile is None:
        profile = micro_profile(report, room)
    w0, w1, w2 = weights
    enemies = room.count(TileKind.ENEMY)
    treasures = room.count(TileKind.TREASURE)
    non_lenient = w2 * (1.0 - door_safety)
    if enemies:
        den, spa = profile[TileKind.ENEMY]
        non_lenient += w0 * _safe_log10(enemies * spa)
        non_lenient += w1 * _safe_log10(enemies * den)
    lenient = 0.0
    if treasures:
        den, spa = profile[TileKind.TREASURE]
        lenient += 0.5 * _safe_log10(treasures * spa)
        lenient += 0.5 * _safe_log10(treasures * den)
    return _clamp01(1.0 - (non_lenient - 0.5 * lenient))


def score_all(
    room: Room,
    report: PatternReport,
    *,
    target: Room,
    target_profile: dict[TileKind, tuple[float, float]],
    door_safety: float,
    weights: tuple[float, float, float] = DEFAULT_LENIENCY_WEIGHTS,
) -> tuple[float, ...]:
    """All seven dimension scores in DIMENSION_NAMES order."""
    profile = micro_profile(report, room)
    return (
        symmetry(room),
        similarity(room, target),
        nmp(report, room),
        nsp(report, room),
        linearity(report, room),
        inner_similarity(report, room, target_profile, profile),
        leniency(room, report, door_safety, weights, profile),
    )
