"""Expressive-range analytics over streams of unique generated rooms.

A run produces one EraRecord per unique room (first time its exact tile
layout appears). Datasets are plain lists of records; every export here is
a deterministic function of the dataset so reruns with the same seed give
byte-identical files.
"""
from __future__ import annotations

import csv
import math
import statistics
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .dimensions import DIMENSION_INDEX, DIMENSION_NAMES, bin_index

HEX_COLUMNS = 30


@dataclass(frozen=True)
class EraRecord:
    generation_bucket: int
    room_hash: str
    scores: tuple[float, ...]  # one per DIMENSION_NAMES entry
    fitness: float
    feasible: bool

    def score(self, name: str) -> float:
        return self.scores[DIMENSION_INDEX[name]]


@dataclass(frozen=True)
class CoverageStats:
    pair_coverage: float | None  # percent, occupied bins of the active pair grid
    all_dim_coverage: float  # percent, mean over the 21 pairwise projections
    single_dim_coverage: float  # percent, mean over the 7 single-axis projections
    avg_fitness: float


class RecordFormatError(ValueError):
    pass


def ingest(records: Iterable[EraRecord]) -> list[EraRecord]:
    """Deduplicate by room hash (first occurrence wins), keeping order."""
    seen: set[str] = set()
    out = []
    for rec in records:
        if len(rec.scores) != len(DIMENSION_NAMES):
            raise RecordFormatError(f"record {rec.room_hash!r} has {len(rec.scores)} scores")
        if not all(0.0 <= s <= 1.0 for s in rec.scores):
            raise RecordFormatError(f"record {rec.room_hash!r} has out-of-range scores")
        if rec.room_hash in seen:
            continue
        seen.add(rec.room_hash)
        out.append(rec)
    return out


# -- CSV persistence -------------------------------------------------------

ERA_HEADER = ("generation_bucket", "room_hash", *DIMENSION_NAMES, "fitness", "feasible")


def write_era_csv(path: Path | str, records: Sequence[EraRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ERA_HEADER)
        for r in records:
            writer.writerow(
                [r.generation_bucket, r.room_hash, *(repr(s) for s in r.scores),
                 repr(r.fitness), int(r.feasible)]
            )


def read_era_csv(path: Path | str) -> list[EraRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != ERA_HEADER:
            raise RecordFormatError(f"unexpected era CSV header in {path}")
        for row in reader:
            if len(row) != len(ERA_HEADER):
                raise RecordFormatError(f"malformed era CSV row: {row!r}")
            records.append(
                EraRecord(
                    generation_bucket=int(row[0]),
                    room_hash=row[1],
                    scores=tuple(float(v) for v in row[2:9]),
                    fitness=float(row[9]),
                    feasible=bool(int(row[10])),
                )
            )
    return records


# -- coverage ---------------------------------------------------------------


def _occupied_fraction(records: Sequence[EraRecord], axes: tuple[str, ...], g: int) -> float:
    cells = {
        tuple(bin_index(r.score(a), g) for a in axes)
        for r in records
    }
    return len(cells) / g ** len(axes)


def coverage(
    dataset: Sequence[EraRecord],
    pair: tuple[str, str] | None = None,
    granularity: int = 5,
) -> CoverageStats:
    """Occupancy percentages over feasible uniques, plus their mean fitness."""
    feas = [r for r in dataset if r.feasible]
    if not feas:
        return CoverageStats(0.0 if pair else None, 0.0, 0.0, 0.0)
    g = granularity
    pair_cov = _occupied_fraction(feas, pair, g) * 100.0 if pair else None
    all_pairs = [
        _occupied_fraction(feas, (a, b), g) for a, b in combinations(DIMENSION_NAMES, 2)
    ]
    singles = [_occupied_fraction(feas, (a,), g) for a in DIMENSION_NAMES]
    return CoverageStats(
        pair_coverage=pair_cov,
        all_dim_coverage=100.0 * sum(all_pairs) / len(all_pairs),
        single_dim_coverage=100.0 * sum(singles) / len(singles),
        avg_fitness=sum(r.fitness for r in feas) / len(feas),
    )


# -- hexbin ------------------------------------------------------------------


@dataclass(frozen=True)
class HexBin:
    q: int
    r: int
    cx: float
    cy: float
    count: int


_HEX_SIZE = 1.0 / (HEX_COLUMNS * math.sqrt(3.0))


def _hex_axial(x: float, y: float) -> tuple[int, int]:
    qf = (math.sqrt(3.0) / 3.0 * x - y / 3.0) / _HEX_SIZE
    rf = (2.0 / 3.0 * y) / _HEX_SIZE
    # cube rounding
    sf = -qf - rf
    q, r, s = round(qf), round(rf), round(sf)
    dq, dr, ds = abs(q - qf), abs(r - rf), abs(s - sf)
    if dq > dr and dq > ds:
        q = -r - s
    elif dr > ds:
        r = -q - s
    return int(q), int(r)


def hex_center(q: int, r: int) -> tuple[float, float]:
    return _HEX_SIZE * math.sqrt(3.0) * (q + r / 2.0), _HEX_SIZE * 1.5 * r


def hexbin(dataset: Sequence[EraRecord], axis_x: str, axis_y: str) -> list[HexBin]:
    """Counts of unique individuals on a fixed pointy-top hex lattice."""
    counts: dict[tuple[int, int], int] = {}
    for rec in dataset:
        key = _hex_axial(rec.score(axis_x), rec.score(axis_y))
        counts[key] = counts.get(key, 0) + 1
    bins = []
    for (q, r), count in sorted(counts.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        cx, cy = hex_center(q, r)
        bins.append(HexBin(q, r, cx, cy, count))
    return bins


def write_hexbin_csv(path: Path | str, bins: Sequence[HexBin]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("q", "r", "center_x", "center_y", "count"))
        for b in bins:
            writer.writerow((b.q, b.r, repr(b.cx), repr(b.cy), b.count))


# -- fitness relations -------------------------------------------------------


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson r; 0.0 when either side has no variance or too few points."""
    if len(xs) < 2:
        return 0.0
    try:
        return statistics.correlation(xs, ys)
    except statistics.StatisticsError:
        return 0.0


def fitness_by_dimension(dataset: Sequence[EraRecord]) -> dict[str, dict]:
    """Per-dimension (score, fitness) samples and their Pearson correlation."""
    out = {}
    for name in DIMENSION_NAMES:
        points = [(r.score(name), r.fitness) for r in dataset]
        out[name] = {
            "points": points,
            "pearson_r": pearson([p[0] for p in points], [p[1] for p in points]),
        }
    return out


def write_fitness_by_dimension_csv(path: Path | str, dataset: Sequence[EraRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("dimension", "score", "fitness"))
        for name in DIMENSION_NAMES:
            for rec in dataset:
                writer.writerow((name, repr(rec.score(name)), repr(rec.fitness)))


@dataclass(frozen=True)
class BucketStats:
    bucket: int
    count: int
    mean_fitness: float
    max_fitness: float
    ci95: float


def fitness_over_time(dataset: Sequence[EraRecord]) -> list[BucketStats]:
    """Mean/max novel-room fitness per generation bucket; empty buckets are gaps."""
    groups: dict[int, list[float]] = {}
    for rec in dataset:
        groups.setdefault(rec.generation_bucket, []).append(rec.fitness)
    rows = []
    for bucket in sorted(groups):
        values = groups[bucket]
        mean = sum(values) / len(values)
        if len(values) > 1:
            ci = 1.96 * statistics.stdev(values) / math.sqrt(len(values))
        else:
            ci = 0.0
        rows.append(BucketStats(bucket, len(values), mean, max(values), ci))
    return rows


def write_fitness_over_time_csv(path: Path | str, rows: Sequence[BucketStats]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("generation_bucket", "count", "mean_fitness", "max_fitness", "ci95"))
        for r in rows:
            writer.writerow((r.bucket, r.count, repr(r.mean_fitness), repr(r.max_fitness), repr(r.ci95)))


# -- SVG exports -------------------------------------------------------------

_SVG_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'

TILE_COLORS = {
    "f": "#efe9dc",
    "w": "#494a55",
    "t": "#e3b53c",
    "e": "#bb4433",
    "d": "#7d5a3c",
}


def _heat_color(frac: float) -> str:
    """Dark violet to light yellow, lighter = denser."""
    stops = ((48, 18, 84), (190, 78, 98), (252, 234, 150))
    if frac <= 0.5:
        a, b, t = stops[0], stops[1], frac * 2.0
    else:
        a, b, t = stops[1], stops[2], (frac - 0.5) * 2.0
    rgb = tuple(round(a[i] + (b[i] - a[i]) * t) for i in range(3))
    return f"#{rgb[0]:02x}{rgb[1]:02x}{rgb[2]:02x}"


def _hex_points(cx: float, cy: float, size: float) -> str:
    pts = []
    for k in range(6):
        ang = math.pi / 180.0 * (60.0 * k - 30.0)
        pts.append(f"{cx + size * math.cos(ang):.4f},{cy + size * math.sin(ang):.4f}")
    return " ".join(pts)


def hexbin_svg(
    path: Path | str,
    bins: Sequence[HexBin],
    axis_x: str,
    axis_y: str,
    target_point: tuple[float, float] | None = None,
    plot_size: int = 440,
) -> None:
    """Heat plot of a hexbin grid; the target's score gets an orange mark."""
    margin = 46
    span = plot_size - 2 * margin

    def px(v: float) -> float:
        return margin + v * span

    def py(v: float) -> float:
        return plot_size - margin - v * span

    top = max((b.count for b in bins), default=1)
    parts = [
        _SVG_HEADER,
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{plot_size}" height="{plot_size}" '
        f'viewBox="0 0 {plot_size} {plot_size}">\n',
        f'<rect width="{plot_size}" height="{plot_size}" fill="white"/>\n',
    ]
    size = _HEX_SIZE * span
    for b in bins:
        color = _heat_color(b.count / top)
        parts.append(
            f'<polygon points="{_hex_points(px(b.cx), py(b.cy), size)}" fill="{color}">'
            f"<title>{b.count}</title></polygon>\n"
        )
    if target_point is not None:
        tx, ty = target_point
        parts.append(
            f'<circle cx="{px(tx):.2f}" cy="{py(ty):.2f}" r="5" fill="none" '
            f'stroke="#ff7f0e" stroke-width="2.5"/>\n'
        )
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        f'fill="none" stroke="#333" stroke-width="1"/>\n'
    )
    parts.append(
        f'<text x="{plot_size / 2:.0f}" y="{plot_size - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{axis_x}</text>\n'
    )
    parts.append(
        f'<text x="14" y="{plot_size / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 14 {plot_size / 2:.0f})">{axis_y}</text>\n'
    )
    parts.append("</svg>\n")
    Path(path).write_text("".join(parts))


def fitness_over_time_svg(path: Path | str, rows: Sequence[BucketStats], plot_size: int = 520) -> None:
    margin = 46
    width, height = plot_size, 320
    span_x = width - 2 * margin
    span_y = height - 2 * margin
    last = max((r.bucket for r in rows), default=1) or 1

    def px(bucket: int) -> float:
        return margin + span_x * bucket / last

    def py(v: float) -> float:
        return height - margin - span_y * v

    parts = [
        _SVG_HEADER,
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n',
        f'<rect width="{width}" height="{height}" fill="white"/>\n',
    ]
    if rows:
        band = [f"{px(r.bucket):.2f},{py(min(1.0, r.mean_fitness + r.ci95)):.2f}" for r in rows]
        band += [
            f"{px(r.bucket):.2f},{py(max(0.0, r.mean_fitness - r.ci95)):.2f}" for r in reversed(rows)
        ]
        parts.append(f'<polygon points="{" ".join(band)}" fill="#9ecae1" opacity="0.5"/>\n')
        mean_line = " ".join(f"{px(r.bucket):.2f},{py(r.mean_fitness):.2f}" for r in rows)
        max_line = " ".join(f"{px(r.bucket):.2f},{py(r.max_fitness):.2f}" for r in rows)
        parts.append(
            f'<polyline points="{mean_line}" fill="none" stroke="#1f77b4" stroke-width="2"/>\n'
        )
        parts.append(
            f'<polyline points="{max_line}" fill="none" stroke="#1f77b4" stroke-width="1.5" '
            f'stroke-dasharray="6 4"/>\n'
        )
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{span_x}" height="{span_y}" fill="none" '
        f'stroke="#333" stroke-width="1"/>\n'
    )
    parts.append(
        f'<text x="{width / 2:.0f}" y="{height - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">generation</text>\n'
    )
    parts.append(
        f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 14 {height / 2:.0f})">fitness</text>\n'
    )
    parts.append("</svg>\n")
    Path(path).write_text("".join(parts))


def scatter_svg(
    path: Path | str,
    points: Sequence[tuple[float, float]],
    axis_x: str,
    axis_y: str = "fitness",
    plot_size: int = 360,
) -> None:
    margin = 40
    span = plot_size - 2 * margin
    parts = [
        _SVG_HEADER,
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{plot_size}" height="{plot_size}" '
        f'viewBox="0 0 {plot_size} {plot_size}">\n',
        f'<rect width="{plot_size}" height="{plot_size}" fill="white"/>\n',
    ]
    for x, y in points:
        parts.append(
            f'<circle cx="{margin + x * span:.2f}" cy="{plot_size - margin - y * span:.2f}" '
            f'r="1.6" fill="#1f77b4" opacity="0.35"/>\n'
        )
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" fill="none" '
        f'stroke="#333" stroke-width="1"/>\n'
    )
    parts.append(
        f'<text x="{plot_size / 2:.0f}" y="{plot_size - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{axis_x}</text>\n'
    )
    parts.append(
        f'<text x="13" y="{plot_size / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="13" transform="rotate(-90 13 {plot_size / 2:.0f})">{axis_y}</text>\n'
    )
    parts.append("</svg>\n")
    Path(path).write_text("".join(parts))


def elite_grid_svg(
    path: Path | str,
    granularity: tuple[int, int],
    cells: dict[tuple[int, int], tuple[list[str], float]],
    axis_x: str,
    axis_y: str,
    tile_px: int = 9,
) -> None:
    """Fig-style montage: one room drawing per occupied (x_bin, y_bin) cell."""
    gx, gy = granularity
    if cells:
        any_rows = next(iter(cells.values()))[0]
        room_w = len(any_rows[0]) * tile_px
        room_h = len(any_rows) * tile_px
    else:
        room_w = room_h = 10 * tile_px
    pad, label = 14, 34
    width = label + gx * (room_w + pad) + pad
    height = label + gy * (room_h + pad) + pad
    parts = [
        _SVG_HEADER,
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n',
        f'<rect width="{width}" height="{height}" fill="white"/>\n',
        f'<text x="{label + (width - label) / 2:.0f}" y="{height - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{axis_x} →</text>\n',
        f'<text x="12" y="{(height - label) / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 12 {(height - label) / 2:.0f})">{axis_y} →</text>\n',
    ]
    for (bx, by), (rows, fit) in sorted(cells.items()):
        ox = label + pad + bx * (room_w + pad)
        # y bin 0 at the bottom
        oy = pad + (gy - 1 - by) * (room_h + pad)
        for yy, row in enumerate(rows):
            for xx, ch in enumerate(row):
                parts.append(
                    f'<rect x="{ox + xx * tile_px}" y="{oy + yy * tile_px}" width="{tile_px}" '
                    f'height="{tile_px}" fill="{TILE_COLORS[ch]}"/>\n'
                )
        parts.append(
            f'<rect x="{ox}" y="{oy}" width="{room_w}" height="{room_h}" fill="none" '
            f'stroke="#222" stroke-width="0.8"/>\n'
        )
        parts.append(
            f'<text x="{ox + room_w - 2}" y="{oy + 10}" text-anchor="end" '
            f'font-family="sans-serif" font-size="9" fill="#111">{fit:.2f}</text>\n'
        )
    parts.append("</svg>\n")
    Path(path).write_text("".join(parts))
