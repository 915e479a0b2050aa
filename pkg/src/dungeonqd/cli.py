"""Batch experiment driver: pair runs, dimension sweeps, analysis, serving.

Every run directory gets a manifest (config, seed, target, version) that is
sufficient to reproduce its outputs byte for byte.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations
from pathlib import Path

from . import __version__, analytics, presets
from .analytics import EraRecord
from .dimensions import DIMENSION_NAMES, DimensionDescriptor
from .engine import EliteBroadcast, Engine, EngineConfig, run_objective_baseline
from .fitness import FitnessContext, door_safety, score_room
from .patterns import detect
from .room import Room, decode_room, encode_room

COMPARISON_AXES = ("linearity", "leniency")


def load_target(spec: str | None) -> Room:
    if spec in (None, "basic"):
        return presets.basic_room()
    if spec == "complex":
        return presets.complex_room()
    return decode_room(Path(spec).read_text())


def parse_dims(text: str, granularity: int) -> tuple[DimensionDescriptor, ...]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    return tuple(DimensionDescriptor(name, granularity) for name in names)


def target_scores(target: Room, ctx: FitnessContext) -> tuple[float, ...]:
    scores, _ = score_room(target, detect(target), ctx, door_safety(target))
    return scores


def write_manifest(out: Path, label: str, config: EngineConfig, target: Room,
                   generations: int, extra: dict | None = None) -> None:
    manifest = {
        "label": label,
        "version": __version__,
        "generations": generations,
        "config": config.to_dict(),
        "target": encode_room(target),
    }
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def coverage_report(dataset: list[EraRecord], pair: tuple[str, str] | None,
                    granularity: int) -> dict:
    stats = analytics.coverage(dataset, pair, granularity)
    projections = {
        f"{a},{b}": analytics.coverage(dataset, (a, b), granularity).pair_coverage
        for a, b in combinations(DIMENSION_NAMES, 2)
    }
    return {
        "pair": list(pair) if pair else None,
        "pair_coverage": stats.pair_coverage,
        "all_dim_coverage": stats.all_dim_coverage,
        "single_dim_coverage": stats.single_dim_coverage,
        "avg_fitness": stats.avg_fitness,
        "unique_individuals": len(dataset),
        "pair_projections": projections,
    }


def export_run(
    out: Path,
    era: list[EraRecord],
    target: Room,
    ctx: FitnessContext,
    pair: tuple[str, str] | None,
    granularity: int,
    broadcast: EliteBroadcast | None,
) -> dict:
    """Write every analytics artifact for one finished run; returns coverage."""
    out.mkdir(parents=True, exist_ok=True)
    dataset = analytics.ingest(era)
    analytics.write_era_csv(out / "era.csv", dataset)

    report = coverage_report(dataset, pair, granularity)
    (out / "coverage.json").write_text(json.dumps(report, indent=2, sort_keys=True))

    marks = target_scores(target, ctx)

    def mark(axis_x: str, axis_y: str) -> tuple[float, float]:
        return (
            marks[DIMENSION_NAMES.index(axis_x)],
            marks[DIMENSION_NAMES.index(axis_y)],
        )

    axes = [pair] if pair else []
    if tuple(COMPARISON_AXES) != pair:
        axes.append(COMPARISON_AXES)
    for axis_x, axis_y in axes:
        bins = analytics.hexbin(dataset, axis_x, axis_y)
        stem = f"hexbin_{axis_x}_x_{axis_y}"
        analytics.write_hexbin_csv(out / f"{stem}.csv", bins)
        analytics.hexbin_svg(out / f"{stem}.svg", bins, axis_x, axis_y, mark(axis_x, axis_y))

    analytics.write_fitness_by_dimension_csv(out / "fitness_by_dimension.csv", dataset)
    relations = analytics.fitness_by_dimension(dataset)
    correlations = {name: relations[name]["pearson_r"] for name in DIMENSION_NAMES}
    (out / "correlations.json").write_text(json.dumps(correlations, indent=2, sort_keys=True))
    for name in DIMENSION_NAMES:
        analytics.scatter_svg(out / f"fitness_vs_{name}.svg", relations[name]["points"], name)

    rows = analytics.fitness_over_time(dataset)
    analytics.write_fitness_over_time_csv(out / "fitness_over_time.csv", rows)
    analytics.fitness_over_time_svg(out / "fitness_over_time.svg", rows)

    if broadcast is not None:
        (out / "elites.json").write_text(
            json.dumps(broadcast.to_json(), indent=2, sort_keys=True)
        )
        if pair and len(broadcast.dims) == 2:
            cells = {
                coords: (ind.room.rows_as_text(), ind.fitness.total)
                for coords, ind in broadcast.elites.items()
            }
            gx, gy = (d.granularity for d in broadcast.dims)
            analytics.elite_grid_svg(
                out / "elites.svg", (gx, gy), cells, pair[0], pair[1]
            )
    return report


def run_pair(args) -> int:
    granularity = args.granularity
    dims = parse_dims(args.dims, granularity)
    if len(dims) != 2:
        raise SystemExit(f"pair-run needs exactly two dimensions, got {args.dims!r}")
    target = load_target(args.target)
    config = EngineConfig(
        pop_size=args.pop_size,
        publish_gen=args.publish_gen,
        rng_seed=args.seed,
        dims=dims,
        granularity=granularity,
    )
    engine = Engine(config, target)
    broadcast = engine.run(args.generations)
    if broadcast is None:
        broadcast = engine.broadcast()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pair = (dims[0].kind, dims[1].kind)
    report = export_run(out, engine.era, target, engine.ctx, pair, granularity, broadcast)
    write_manifest(out, f"pair:{pair[0]},{pair[1]}", config, target, args.generations)
    occupied = sum(1 for cell in broadcast.elites.values() if cell is not None)
    print(
        f"pair-run {pair[0]}x{pair[1]}: gen {broadcast.generation}, "
        f"{occupied} elite cells, pair coverage {report['pair_coverage']:.1f}%, "
        f"avg fitness {report['avg_fitness']:.3f}"
    )
    return 0


def _sweep_worker(task: dict) -> dict:
    """One sweep experiment in its own process; returns a summary row."""
    config = EngineConfig.from_dict(task["config"])
    target = decode_room(task["target"])
    out = Path(task["out"])
    generations = task["generations"]
    granularity = task["granularity"]
    label = task["label"]
    extra = {}
    if task["kind"] == "baseline":
        result = run_objective_baseline(config, target, generations)
        era = result.era
        broadcast = None
        ctx = FitnessContext.from_target(target, config.leniency_weights)
        pair = None
    else:
        engine = Engine(config, target)
        broadcast = engine.run(generations) or engine.broadcast()
        era = engine.era
        ctx = engine.ctx
        pair = task.get("pair")
        extra["archive_cells"] = len(engine.archive.cells)
    report = export_run(out, era, target, ctx, pair, granularity, broadcast)
    write_manifest(out, label, config, target, generations, extra)
    return {
        "label": label,
        "avg_fitness": report["avg_fitness"],
        "all_dim_coverage": report["all_dim_coverage"],
        "pair_coverage": report["pair_coverage"],
        "single_dim_coverage": report["single_dim_coverage"],
        "unique_individuals": report["unique_individuals"],
    }


def sweep_tasks(target: Room, out: Path, generations: int, seed: int,
                granularity: int, pop_size: int, publish_gen: int,
                pairs: list[tuple[str, str]] | None = None) -> list[dict]:
    """All 21 pair runs (or a subset) plus the all-dims run and the baseline."""
    chosen = pairs if pairs is not None else list(combinations(DIMENSION_NAMES, 2))
    target_text = encode_room(target)
    base = dict(
        popSize=pop_size, publishGen=publish_gen, rngSeed=seed, granularity=granularity
    )
    tasks = []
    for a, b in chosen:
        tasks.append(
            {
                "kind": "pair",
                "label": f"pair:{a},{b}",
                "pair": (a, b),
                "config": {**base, "dims": [a, b]},
                "target": target_text,
                "out": str(out / f"pair_{a}_{b}"),
                "generations": generations,
                "granularity": granularity,
            }
        )
    tasks.append(
        {
            "kind": "all-dims",
            "label": "all-dims",
            "pair": None,
            "config": {**base, "dims": list(DIMENSION_NAMES)},
            "target": target_text,
            "out": str(out / "all_dims"),
            "generations": generations,
            "granularity": granularity,
        }
    )
    tasks.append(
        {
            "kind": "baseline",
            "label": "objective-ea",
            "config": {**base, "dims": ["nsp", "symmetry"]},
            "target": target_text,
            "out": str(out / "objective_ea"),
            "generations": generations,
            "granularity": granularity,
        }
    )
    return tasks


def write_sweep_summary(out: Path, rows: list[dict]) -> None:
    import csv

    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ("label", "avg_fitness", "all_dim_coverage", "pair_coverage",
             "single_dim_coverage", "unique_individuals")
        )
        for row in rows:
            writer.writerow(
                (
                    row["label"],
                    repr(row["avg_fitness"]),
                    repr(row["all_dim_coverage"]),
                    "N/A" if row["pair_coverage"] is None else repr(row["pair_coverage"]),
                    repr(row["single_dim_coverage"]),
                    row["unique_individuals"],
                )
            )


def run_sweep(args) -> int:
    target = load_target(args.target)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pairs = None
    if args.pairs != "all":
        pairs = [tuple(p.split("/")) for p in args.pairs.split(",")]
        for pair in pairs:
            if len(pair) != 2 or any(n not in DIMENSION_NAMES for n in pair):
                raise SystemExit(f"bad pair spec {pair!r}")
    tasks = sweep_tasks(
        target, out, args.generations, args.seed, args.granularity,
        args.pop_size, args.publish_gen, pairs,
    )
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_worker, tasks))
    else:
        rows = [_sweep_worker(t) for t in tasks]
    write_sweep_summary(out, rows)
    print(f"sweep: {len(rows)} runs -> {out / 'summary.csv'}")
    return 0


def run_analyze(args) -> int:
    src = Path(args.input)
    out = Path(args.out)
    era_files = sorted(src.rglob("era.csv"))
    if not era_files:
        print(f"no era.csv files under {src}", file=sys.stderr)
        return 1
    for era_file in era_files:
        run_dir = era_file.parent
        manifest_path = run_dir / "manifest.json"
        pair = None
        granularity = 5
        target = presets.basic_room()
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text())
            granularity = manifest["config"].get("granularity", 5)
            target = decode_room(manifest["target"])
            dims = manifest["config"].get("dims", [])
            if manifest.get("label", "").startswith("pair:") and len(dims) == 2:
                pair = (dims[0]["kind"], dims[1]["kind"])
        dataset = analytics.read_era_csv(era_file)
        ctx = FitnessContext.from_target(target)
        dest = out / run_dir.name
        export_run(dest, dataset, target, ctx, pair, granularity, None)
    print(f"analyze: {len(era_files)} runs -> {out}")
    return 0


def run_serve(args) -> int:
    from .service import serve

    config_data = {}
    if args.config:
        config_data = json.loads(Path(args.config).read_text())
    port = args.port if args.port is not None else config_data.get("port", 8008)
    target = load_target(config_data.get("target"))
    engine_config = EngineConfig.from_dict(config_data.get("engine", config_data))
    serve(host=args.host, port=port, default_config=engine_config, default_target=target)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dungeonqd", description="Quality-diversity dungeon room search"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--target", default=None,
                       help="room file, or 'basic'/'complex' for the bundled targets")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True)
        p.add_argument("--granularity", type=int, default=5)
        p.add_argument("--pop-size", type=int, default=1000)
        p.add_argument("--publish-gen", type=int, default=100)

    p_pair = sub.add_parser("pair-run", help="one IC MAP-Elites run over a dimension pair")
    p_pair.add_argument("--dims", required=True, help="comma-separated pair, e.g. nsp,symmetry")
    p_pair.add_argument("--generations", type=int, default=2100)
    common(p_pair)
    p_pair.set_defaults(func=run_pair)

    p_sweep = sub.add_parser("sweep", help="all dimension pairs + all-dims + objective baseline")
    p_sweep.add_argument("--generations", type=int, default=5000)
    p_sweep.add_argument("--pairs", default="all",
                         help="comma-separated a/b pairs to restrict the sweep")
    p_sweep.add_argument("--workers", type=int, default=1)
    common(p_sweep)
    p_sweep.set_defaults(func=run_sweep)

    p_serve = sub.add_parser("serve", help="start the interactive session service")
    p_serve.add_argument("--config", default=None)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.set_defaults(func=run_serve)

    p_an = sub.add_parser("analyze", help="recompute analytics from stored era CSVs")
    p_an.add_argument("--in", dest="input", required=True)
    p_an.add_argument("--out", required=True)
    p_an.set_defaults(func=run_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
