"""Constrained MAP-Elites with per-cell feasible/infeasible populations.

The archive is a dense grid of cells addressed by binned dimension scores.
Each cell holds two capped, fitness-sorted populations: feasible rooms and
infeasible ones. Evolution is continuous: every `publish_gen` generations
the engine broadcasts its elites, then refreshes the archive by mutating a
copy of every stored room and re-inserting the designer's target.

Everything is driven by one seeded RNG and deterministic iteration orders,
so identical config + seed + command schedule reproduces a run exactly.

The objective-based FI2Pop EA (no archive) used as an evaluation baseline
lives here too, sharing the breeding operators.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterator, Sequence

from .analytics import EraRecord
from .dimensions import DIMENSION_INDEX, DimensionDescriptor, bin_index
from .fitness import FitnessContext, FitnessValue, door_safety, score_room
from .patterns import detect
from .room import Room, TileKind, is_feasible

DEFAULT_DIMS = (DimensionDescriptor("nsp"), DimensionDescriptor("symmetry"))


def room_hash(tiles: bytes) -> str:
    return hashlib.sha1(tiles).hexdigest()[:16]


@dataclass(frozen=True)
class EngineConfig:
    pop_size: int = 1000
    cell_capacity: int = 25
    publish_gen: int = 100
    parents_per_population: int = 5
    tournament_size: int = 3
    mutation_rate: float = 0.30
    rng_seed: int = 0
    dims: tuple[DimensionDescriptor, ...] = DEFAULT_DIMS
    granularity: int = 5
    leniency_weights: tuple[float, float, float] = (0.4, 0.4, 0.2)

    def __post_init__(self) -> None:
        for name in ("pop_size", "cell_capacity", "publish_gen", "parents_per_population",
                     "tournament_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must be in [0, 1]")
        _check_dims(self.dims)

    # Config files use the camelCase key names of the session protocol.
    _KEYS = {
        "popSize": "pop_size",
        "cellCapacity": "cell_capacity",
        "publishGen": "publish_gen",
        "parentsPerPopulation": "parents_per_population",
        "tournamentSize": "tournament_size",
        "mutationRate": "mutation_rate",
        "rngSeed": "rng_seed",
        "granularity": "granularity",
    }

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        kwargs = {}
        for key, attr in cls._KEYS.items():
            if key in data:
                kwargs[attr] = data[key]
        granularity = data.get("granularity", 5)
        if "dims" in data:
            kwargs["dims"] = tuple(
                DimensionDescriptor(d, granularity)
                if isinstance(d, str)
                else DimensionDescriptor(d["kind"], d.get("granularity", granularity))
                for d in data["dims"]
            )
        if "leniencyWeights" in data:
            kwargs["leniency_weights"] = tuple(data["leniencyWeights"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        data = {key: getattr(self, attr) for key, attr in self._KEYS.items()}
        data["dims"] = [{"kind": d.kind, "granularity": d.granularity} for d in self.dims]
        data["leniencyWeights"] = list(self.leniency_weights)
        return data


def _check_dims(dims: Sequence[DimensionDescriptor]) -> None:
    if not 2 <= len(dims) <= 7:
        raise ValueError("between 2 and 7 dimensions required")
    kinds = [d.kind for d in dims]
    if len(set(kinds)) != len(kinds):
        raise ValueError("dimension kinds must be distinct")


@dataclass(slots=True)
class Individual:
    room: Room
    scores: tuple[float, ...]
    fitness: FitnessValue
    feasible: bool


@dataclass(slots=True)
class Cell:
    feasible: list[Individual] = field(default_factory=list)
    infeasible: list[Individual] = field(default_factory=list)

    def population(self, feasible: bool) -> list[Individual]:
        return self.feasible if feasible else self.infeasible


class _IndexedSet:
    """Set with O(1) add/discard and uniform random choice (stable order)."""

    def __init__(self) -> None:
        self._items: list = []
        self._pos: dict = {}

    def add(self, key) -> None:
        if key not in self._pos:
            self._pos[key] = len(self._items)
            self._items.append(key)

    def discard(self, key) -> None:
        pos = self._pos.pop(key, None)
        if pos is None:
            return
        last = self._items.pop()
        if pos < len(self._items):
            self._items[pos] = last
            self._pos[last] = pos

    def choose(self, rng: random.Random):
        return self._items[rng.randrange(len(self._items))]

    def __len__(self) -> int:
        return len(self._items)


def _insert_sorted(population: list[Individual], ind: Individual, capacity: int) -> bool:
    """Insert keeping descending fitness order; returns False if trimmed away."""
    total = ind.fitness.total
    lo, hi = 0, len(population)
    while lo < hi:
        mid = (lo + hi) // 2
        if population[mid].fitness.total >= total:
            lo = mid + 1
        else:
            hi = mid
    population.insert(lo, ind)
    if len(population) > capacity:
        dropped = population.pop()
        return dropped is not ind
    return True


class Archive:
    """Dense MAP-Elites grid over the active dimension descriptors."""

    def __init__(self, dims: Sequence[DimensionDescriptor], capacity: int) -> None:
        _check_dims(dims)
        self.dims = tuple(dims)
        self.capacity = capacity
        self._score_slots = tuple(DIMENSION_INDEX[d.kind] for d in self.dims)
        self.cells: dict[tuple[int, ...], Cell] = {
            coords: Cell() for coords in product(*(range(d.granularity) for d in self.dims))
        }
        self.nonempty = {True: _IndexedSet(), False: _IndexedSet()}

    def coords_for(self, scores: Sequence[float]) -> tuple[int, ...]:
        return tuple(
            bin_index(scores[slot], d.granularity)
            for slot, d in zip(self._score_slots, self.dims)
        )

    def insert(self, ind: Individual) -> tuple[int, ...]:
        coords = self.coords_for(ind.scores)
        cell = self.cells[coords]
        population = cell.population(ind.feasible)
        _insert_sorted(population, ind, self.capacity)
        if population:
            self.nonempty[ind.feasible].add(coords)
        return coords

    def clear(self) -> None:
        """Empty every occupied cell without rebuilding the dense grid."""
        occupied = set(self.nonempty[True]._items) | set(self.nonempty[False]._items)
        for coords in occupied:
            cell = self.cells[coords]
            cell.feasible.clear()
            cell.infeasible.clear()
        self.nonempty = {True: _IndexedSet(), False: _IndexedSet()}

    def items(self) -> Iterator[tuple[tuple[int, ...], bool, Individual]]:
        """Deterministic iteration: cell order, feasible before infeasible."""
        for coords, cell in self.cells.items():
            for ind in cell.feasible:
                yield coords, True, ind
            for ind in cell.infeasible:
                yield coords, False, ind

    def individuals(self) -> list[Individual]:
        return [ind for _, _, ind in self.items()]

    def elites(self) -> dict[tuple[int, ...], Individual]:
        return {
            coords: cell.feasible[0] for coords, cell in self.cells.items() if cell.feasible
        }

    def occupancy(self) -> dict[tuple[int, ...], tuple[int, int]]:
        return {
            coords: (len(cell.feasible), len(cell.infeasible))
            for coords, cell in self.cells.items()
            if cell.feasible or cell.infeasible
        }


@dataclass(frozen=True)
class EliteBroadcast:
    generation: int
    dims: tuple[DimensionDescriptor, ...]
    elites: dict[tuple[int, ...], Individual]
    occupancy: dict[tuple[int, ...], tuple[int, int]]

    def to_json(self) -> dict:
        cells = []
        for coords in sorted(self.occupancy):
            feas, infeas = self.occupancy[coords]
            elite = self.elites.get(coords)
            cells.append(
                {
                    "coords": list(coords),
                    "feasible": feas,
                    "infeasible": infeas,
                    "fitness": None if elite is None else elite.fitness.total,
                    "elite": None if elite is None else elite.room.rows_as_text(),
                }
            )
        return {
            "generation": self.generation,
            "dims": [{"kind": d.kind, "granularity": d.granularity} for d in self.dims],
            "cells": cells,
        }


class _Breeder:
    """Shared evolution operators: crossover, mutation, evaluation, logging."""

    config: EngineConfig
    rng: random.Random
    ctx: FitnessContext
    target: Room
    generation: int
    era: list[EraRecord]

    def _bind_target(self, target: Room) -> None:
        self.target = target
        self.ctx = FitnessContext.from_target(target, self.config.leniency_weights)
        door_idx = {target.index(x, y) for x, y in target.doors}
        locked_idx = {target.index(x, y) for x, y in target.locked}
        self._locked_idx = sorted(locked_idx - door_idx)
        self._mutable = [
            i for i in range(len(target.tiles)) if i not in door_idx and i not in locked_idx
        ]
        if not self._mutable:
            raise ValueError("target has no mutable tiles")

    def _conform(self, tiles: bytearray) -> bytes:
        target = self.target.tiles
        for i in self._locked_idx:
            tiles[i] = target[i]
        return bytes(tiles)

    def _crossover(self, a: bytes, b: bytes) -> bytes:
        i = self.rng.randrange(len(a) + 1)
        j = self.rng.randrange(len(a) + 1)
        if i > j:
            i, j = j, i
        return self._conform(bytearray(a[:i] + b[i:j] + a[j:]))

    def _mutate(self, tiles: bytes) -> bytes:
        out = bytearray(tiles)
        idx = self._mutable[self.rng.randrange(len(self._mutable))]
        out[idx] = self.rng.randrange(4)  # floor, wall, treasure or enemy
        return self._conform(out)

    def _scatter(self, tiles: bytes) -> bytes:
        """Seeding mutation: randomize a random-sized patch of the target so
        the initial population lands across the whole archive, not in one cell."""
        out = bytearray(tiles)
        count = 1 + self.rng.randrange(len(self._mutable))
        for idx in self.rng.sample(self._mutable, count):
            out[idx] = self.rng.randrange(4)
        return self._conform(out)

    def _offspring(self, a: bytes, b: bytes) -> bytes:
        child = self._crossover(a, b)
        if self.rng.random() < self.config.mutation_rate:
            child = self._mutate(child)
        return child

    def _bucket(self) -> int:
        p = self.config.publish_gen
        return ((self.generation + p - 1) // p) * p if self.generation else 0

    def evaluate_tiles(self, tiles: bytes) -> Individual:
        room = Room(self.target.cols, self.target.rows, tiles, self.target.doors,
                    self.target.locked)
        report = detect(room)
        safety = door_safety(room)
        scores, fit = score_room(room, report, self.ctx, safety)
        ind = Individual(room, scores, fit, is_feasible(room))
        if tiles not in self._seen:
            self._seen.add(tiles)
            self.era.append(
                EraRecord(self._bucket(), room_hash(tiles), scores, fit.total, ind.feasible)
            )
        return ind


class Engine(_Breeder):
    """Interactive constrained MAP-Elites over one room."""

    def __init__(self, config: EngineConfig, target: Room) -> None:
        self.config = config
        self.rng = random.Random(config.rng_seed)
        self.generation = 0
        self.era: list[EraRecord] = []
        self._seen: set[bytes] = set()
        self._ctx_dirty = False
        self._bind_target(target)
        self.archive = Archive(config.dims, config.cell_capacity)
        self._seed_population()

    def _seed_population(self) -> None:
        for _ in range(self.config.pop_size):
            self.archive.insert(self.evaluate_tiles(self._scatter(self.target.tiles)))

    def _tournament(self, feasible: bool) -> Individual:
        coords = self.archive.nonempty[feasible].choose(self.rng)
        population = self.archive.cells[coords].population(feasible)
        best = population[self.rng.randrange(len(population))]
        for _ in range(self.config.tournament_size - 1):
            rival = population[self.rng.randrange(len(population))]
            if rival.fitness.total > best.fitness.total:
                best = rival
        return best

    def step_generation(self) -> None:
        """One generation: breed each population class, insert, trim."""
        self.generation += 1
        count = self.config.parents_per_population
        for feasible in (True, False):
            if not len(self.archive.nonempty[feasible]):
                continue
            parents = [self._tournament(feasible) for _ in range(count)]
            for i in range(count):
                a = parents[i].room.tiles
                b = parents[(i + 1) % count].room.tiles
                self.archive.insert(self.evaluate_tiles(self._offspring(a, b)))

    def broadcast(self) -> EliteBroadcast:
        """Emit elites, then refresh: mutate a copy of everything, re-add target."""
        snapshot = EliteBroadcast(
            generation=self.generation,
            dims=self.archive.dims,
            elites=dict(self.archive.elites()),
            occupancy=self.archive.occupancy(),
        )
        originals = self.archive.individuals()
        mutants = [self._mutate(ind.room.tiles) for ind in originals]
        self.archive.clear()
        if self._ctx_dirty:
            # target or locks changed: re-evaluate retained rooms under the
            # new context, pinning them to the current lock mask
            for ind in originals:
                self.archive.insert(self.evaluate_tiles(self._conform(bytearray(ind.room.tiles))))
            self._ctx_dirty = False
        else:
            for ind in originals:
                self.archive.insert(ind)
        for tiles in mutants:
            self.archive.insert(self.evaluate_tiles(tiles))
        self.archive.insert(self.evaluate_tiles(self.target.tiles))
        return snapshot

    def run(
        self,
        generations: int,
        on_broadcast: Callable[[EliteBroadcast], None] | None = None,
    ) -> EliteBroadcast | None:
        """Run generations, broadcasting on the publish cadence."""
        last = None
        for _ in range(generations):
            self.step_generation()
            if self.generation % self.config.publish_gen == 0:
                last = self.broadcast()
                if on_broadcast is not None:
                    on_broadcast(last)
        return last

    # -- designer interactions --------------------------------------------

    def update_target(self, room: Room) -> None:
        """Swap the fitness context; stored rooms refresh at the next broadcast."""
        if (room.cols, room.rows) != (self.target.cols, self.target.rows):
            raise ValueError("target size cannot change within a session")
        if room.doors != self.target.doors:
            raise ValueError("door layout cannot change within a session")
        if room == self.target:
            return
        self._bind_target(room)
        self._ctx_dirty = True

    def lock_tiles(self, coords: Sequence[tuple[int, int]]) -> None:
        self.update_target(self.target.with_locked(coords))

    def change_dimensions(self, dims: Sequence[DimensionDescriptor]) -> None:
        """Rebuild cells for new axes; re-bin everything from stored scores."""
        _check_dims(dims)
        retained = self.archive.individuals()
        self.archive = Archive(dims, self.config.cell_capacity)
        for ind in retained:
            self.archive.insert(ind)

    def restart(self) -> None:
        self.generation = 0
        self.archive.clear()
        self._seed_population()

    def elite_at(self, coords: tuple[int, ...]) -> Individual | None:
        cell = self.archive.cells.get(tuple(coords))
        if cell is None or not cell.feasible:
            return None
        return cell.feasible[0]


@dataclass
class BaselineRun:
    era: list[EraRecord]
    generations: int
    final_feasible: list[Individual]
    final_infeasible: list[Individual]

    def uniques_per_bucket(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for rec in self.era:
            counts[rec.generation_bucket] = counts.get(rec.generation_bucket, 0) + 1
        return counts


class ObjectiveBaseline(_Breeder):
    """FI2Pop without an archive: two truncation-survival populations.

    Each generation refills both classes with as many offspring as the class
    cap, then keeps the fittest. Seeding stays close to the designer's room
    (single-tile mutants), as in the pre-archive editor: the exploitative
    baseline the quality-diversity engine is compared against.
    """

    def __init__(self, config: EngineConfig, target: Room) -> None:
        self.config = config
        self.rng = random.Random(config.rng_seed)
        self.generation = 0
        self.era: list[EraRecord] = []
        self._seen: set[bytes] = set()
        self._bind_target(target)
        self.cap = max(1, config.pop_size // 2)
        self.pops: dict[bool, list[Individual]] = {True: [], False: []}
        for _ in range(config.pop_size):
            ind = self.evaluate_tiles(self._mutate(target.tiles))
            self.pops[ind.feasible].append(ind)
        self._truncate()

    def _truncate(self) -> None:
        for feasible in (True, False):
            population = self.pops[feasible]
            population.sort(key=lambda i: -i.fitness.total)
            del population[self.cap :]

    def _pick(self, population: list[Individual]) -> Individual:
        best = population[self.rng.randrange(len(population))]
        for _ in range(self.config.tournament_size - 1):
            rival = population[self.rng.randrange(len(population))]
            if rival.fitness.total > best.fitness.total:
                best = rival
        return best

    def step_generation(self) -> None:
        self.generation += 1
        newcomers: list[Individual] = []
        for feasible in (True, False):
            population = self.pops[feasible]
            if not population:
                continue
            for _ in range(self.cap):
                a = self._pick(population).room.tiles
                b = self._pick(population).room.tiles
                newcomers.append(self.evaluate_tiles(self._offspring(a, b)))
        for ind in newcomers:
            self.pops[ind.feasible].append(ind)
        self._truncate()


def run_objective_baseline(
    config: EngineConfig, target: Room, generations: int
) -> BaselineRun:
    ea = ObjectiveBaseline(config, target)
    for _ in range(generations):
        ea.step_generation()
    return BaselineRun(
        era=ea.era,
        generations=generations,
        final_feasible=ea.pops[True],
        final_infeasible=ea.pops[False],
    )
