"""Independent brute-force oracles used to cross-check the library.

Everything here is deliberately written from scratch against the formulas
and definitions, without sharing code paths with the package: BFS per tile
pair, union-find clustering, literal formula transcriptions, exhaustive
path enumeration (networkx) and exhaustive rectangle enumeration.
"""
from __future__ import annotations

import math

import networkx as nx

from dungeonqd.room import Room, TileKind

THETA = {TileKind.ENEMY: 4, TileKind.TREASURE: 4, TileKind.WALL: 6}


# -- reachability ------------------------------------------------------------


def bfs_reaches(room: Room, start: tuple[int, int], goal: tuple[int, int]) -> bool:
    if room.tile(*start) == TileKind.WALL or room.tile(*goal) == TileKind.WALL:
        return False
    seen = {start}
    queue = [start]
    while queue:
        x, y = queue.pop()
        if (x, y) == goal:
            return True
        for nx_, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if (
                0 <= nx_ < room.cols
                and 0 <= ny < room.rows
                and (nx_, ny) not in seen
                and room.tile(nx_, ny) != TileKind.WALL
            ):
                seen.add((nx_, ny))
                queue.append((nx_, ny))
    return False


def feasible_by_pairwise_bfs(room: Room) -> bool:
    """Every pair of (door, enemy, treasure) tiles connected, one BFS per pair."""
    points = list(room.doors)
    for i, t in enumerate(room.tiles):
        if t in (TileKind.ENEMY, TileKind.TREASURE):
            points.append(room.coord(i))
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if not bfs_reaches(room, points[i], points[j]):
                return False
    return True


# -- clustering ---------------------------------------------------------------


class _UnionFind:
    def __init__(self, keys):
        self.parent = {k: k for k in keys}

    def find(self, k):
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def union_find_clusters(room: Room, kind: TileKind) -> set[frozenset[tuple[int, int]]]:
    cells = [room.coord(i) for i, t in enumerate(room.tiles) if t == kind]
    uf = _UnionFind(cells)
    cell_set = set(cells)
    for x, y in cells:
        for n in ((x + 1, y), (x, y + 1)):
            if n in cell_set:
                uf.union((x, y), n)
    groups: dict[tuple[int, int], set] = {}
    for c in cells:
        groups.setdefault(uf.find(c), set()).add(c)
    return {frozenset(g) for g in groups.values()}


# -- dimension formula transcriptions -----------------------------------------


def symmetry_oracle(room: Room) -> float:
    """Highest mirrored-wall count over X, Y and both diagonal axes."""
    walls = {(x, y) for x in range(room.cols) for y in range(room.rows)
             if room.tile(x, y) == TileKind.WALL}
    if not walls:
        return 1.0
    side = min(room.cols, room.rows)
    ox, oy = (room.cols - side) // 2, (room.rows - side) // 2

    def count(mirror):
        total = 0
        for w in walls:
            m = mirror(w)
            if m is not None and m in walls:
                total += 1
        return total

    def vert(w):
        return (room.cols - 1 - w[0], w[1])

    def horiz(w):
        return (w[0], room.rows - 1 - w[1])

    def diag_main(w):
        u, v = w[0] - ox, w[1] - oy
        if 0 <= u < side and 0 <= v < side:
            return (ox + v, oy + u)
        return None

    def diag_anti(w):
        u, v = w[0] - ox, w[1] - oy
        if 0 <= u < side and 0 <= v < side:
            return (ox + side - 1 - v, oy + side - 1 - u)
        return None

    return max(count(m) for m in (vert, horiz, diag_main, diag_anti)) / len(walls)


def similarity_oracle(room: Room, target: Room) -> float:
    total = room.cols * room.rows
    not_similar = 0
    for y in range(room.rows):
        for x in range(room.cols):
            if room.tile(x, y) != target.tile(x, y):
                not_similar += 1
    return (total - not_similar) / total


def nmp_oracle(meso_count: int, room: Room) -> float:
    max_chambers = math.floor(room.cols / 3) * math.floor(room.rows / 3)
    return min(meso_count / max_chambers, 1.0)


def nsp_oracle(spatial_count: int, room: Room) -> float:
    return min(spatial_count / (max(room.cols, room.rows) * 4.0), 1.0)


def centroid(cells, cols) -> tuple[float, float]:
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    return sum(xs) / len(xs), sum(ys) / len(ys)


def density_oracle(cluster_sizes: list[int], kind: TileKind) -> float:
    if not cluster_sizes:
        return 0.0
    theta = THETA[kind]
    return sum(min(1.0, size / theta) for size in cluster_sizes) / len(cluster_sizes)


def sparsity_oracle(clusters: list[set[tuple[int, int]]], room: Room) -> float:
    k = len(clusters)
    if k < 2:
        return 0.0
    size = room.cols * room.rows
    cents = [centroid(c, room.cols) for c in clusters]
    total = 0.0
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            dx = cents[i][0] - cents[j][0]
            dy = cents[i][1] - cents[j][1]
            total += math.sqrt(dx * dx + dy * dy) / size
    return total / (k * (k - 1))


def profile_oracle(room: Room) -> dict[TileKind, tuple[float, float]]:
    out = {}
    for kind in (TileKind.ENEMY, TileKind.TREASURE, TileKind.WALL):
        clusters = [set(c) for c in union_find_clusters(room, kind)]
        clusters_sizes = [len(c) for c in clusters]
        out[kind] = (density_oracle(clusters_sizes, kind), sparsity_oracle(clusters, room))
    return out


def inner_similarity_oracle(room: Room, target: Room) -> float:
    gen, tgt = profile_oracle(room), profile_oracle(target)
    distance = 0.0
    for kind in (TileKind.ENEMY, TileKind.TREASURE, TileKind.WALL):
        distance += abs(gen[kind][0] - tgt[kind][0]) + abs(gen[kind][1] - tgt[kind][1])
    return max(0.0, 1.0 - distance / 6.0)


def leniency_oracle(room: Room, door_safety: float, weights=(0.4, 0.4, 0.2)) -> float:
    def slog(v):
        return math.log10(v) if v > 1.0 else 0.0

    profile = profile_oracle(room)
    en = sum(1 for t in room.tiles if t == TileKind.ENEMY)
    tre = sum(1 for t in room.tiles if t == TileKind.TREASURE)
    w0, w1, w2 = weights
    non_lenient = w2 * (1.0 - door_safety)
    if en:
        den, spa = profile[TileKind.ENEMY]
        non_lenient += w0 * slog(en * spa) + w1 * slog(en * den)
    lenient = 0.0
    if tre:
        den, spa = profile[TileKind.TREASURE]
        lenient = 0.5 * slog(tre * spa) + 0.5 * slog(tre * den)
    value = 1.0 - (non_lenient - 0.5 * lenient)
    return min(1.0, max(0.0, value))


def linearity_oracle(adjacency, door_patterns, spatial_count, neighbors_per_door) -> float:
    """Exhaustive simple-path enumeration via networkx, per-pair cap 1000."""
    graph = nx.Graph()
    graph.add_nodes_from(range(len(adjacency)))
    for a, nbrs in enumerate(adjacency):
        for b in nbrs:
            graph.add_edge(a, b)
    total = 0
    for i in range(len(door_patterns)):
        for j in range(i + 1, len(door_patterns)):
            count = 0
            for _ in nx.all_simple_paths(graph, door_patterns[i], door_patterns[j]):
                count += 1
                if count >= 1000:
                    break
            total += count
    denom = spatial_count + neighbors_per_door
    if denom == 0:
        return 1.0
    return min(1.0, max(0.0, 1.0 - total / denom))


# -- chamber decomposition -----------------------------------------------------


def greedy_rectangles_oracle(room: Room) -> list[set[tuple[int, int]]]:
    """Brute-force replica of greedy largest-rectangle chamber extraction."""
    free = {
        (x, y)
        for x in range(room.cols)
        for y in range(room.rows)
        if room.tile(x, y) != TileKind.WALL
    }
    chambers = []
    while True:
        best = None
        best_key = None
        for top in range(room.rows):
            for left in range(room.cols):
                for height in range(3, room.rows - top + 1):
                    for width in range(3, room.cols - left + 1):
                        cells = {
                            (x, y)
                            for x in range(left, left + width)
                            for y in range(top, top + height)
                        }
                        if not cells <= free:
                            continue
                        key = (-(height * width), top, left, -height)
                        if best_key is None or key < best_key:
                            best_key = key
                            best = cells
        if best is None:
            break
        chambers.append(best)
        free -= best
    return chambers
