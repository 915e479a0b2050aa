"""Quality-diversity search for tile-grid dungeon rooms.

A constrained MAP-Elites engine with feasible/infeasible populations per
cell, seven behavioral dimensions, a designer-in-the-loop session service,
and the expressive-range analytics used to evaluate runs.
"""

from .dimensions import DIMENSION_NAMES, DimensionDescriptor, bin_index
from .engine import (
    Archive,
    EliteBroadcast,
    Engine,
    EngineConfig,
    Individual,
    run_objective_baseline,
)
from .fitness import FitnessContext, FitnessValue, door_safety, evaluate
from .patterns import PatternReport, cluster_micro, detect
from .room import (
    DungeonStub,
    Room,
    TileKind,
    decode_room,
    dungeon_reachability,
    encode_room,
    is_feasible,
    make_room,
    open_room,
    room_from_json,
    room_to_json,
)

__all__ = [
    "DIMENSION_NAMES",
    "DimensionDescriptor",
    "bin_index",
    "Archive",
    "EliteBroadcast",
    "Engine",
    "EngineConfig",
    "Individual",
    "run_objective_baseline",
    "FitnessContext",
    "FitnessValue",
    "door_safety",
    "evaluate",
    "PatternReport",
    "cluster_micro",
    "detect",
    "DungeonStub",
    "Room",
    "TileKind",
    "decode_room",
    "dungeon_reachability",
    "encode_room",
    "is_feasible",
    "make_room",
    "open_room",
    "room_from_json",
    "room_to_json",
]

__version__ = "0.1.0"
