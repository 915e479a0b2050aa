/** Wire types for the session protocol: {session, seq, type, payload}. */

export type TileChar = "f" | "w" | "t" | "e" | "d";

export interface RoomJson {
  cols: number;
  rows: number;
  tiles: string[]; // one string per row
  doors: [number, number][];
  locked: [number, number][];
}

export interface DimensionRef {
  kind: DimensionName;
  granularity: number;
}

export const DIMENSION_NAMES = [
  "symmetry",
  "similarity",
  "nmp",
  "nsp",
  "linearity",
  "inner_similarity",
  "leniency",
] as const;

export type DimensionName = (typeof DIMENSION_NAMES)[number];

export interface BroadcastCell {
  coords: number[];
  feasible: number;
  infeasible: number;
  fitness: number | null;
  elite: string[] | null; // tile rows, same format as RoomJson.tiles
}

export interface ElitesPayload {
  generation: number;
  dims: DimensionRef[];
  cells: BroadcastCell[];
}

export type SessionEvent =
  | { session: string; seq: number; type: "ElitesUpdated"; payload: ElitesPayload }
  | { session: string; seq: number; type: "TargetEcho"; payload: { room: RoomJson } }
  | {
      session: string;
      seq: number;
      type: "Error";
      payload: { code: string; message: string; command_seq?: number };
    }
  | {
      session: string;
      seq: number;
      type: "Stats";
      payload: { generation: number; gens_per_sec: number; occupied_cells: number; stored: number };
    }
  | { session: string; seq: number; type: "Stopped"; payload: Record<string, never> };

export type CommandType =
  | "SetTarget"
  | "LockTiles"
  | "SetDimensions"
  | "ApplySuggestion"
  | "Restart"
  | "Stop";

export interface CommandEnvelope {
  session: string;
  seq: number;
  type: CommandType;
  payload: unknown;
}

export function parseEvent(raw: string): SessionEvent | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const event = data as Record<string, unknown>;
  if (typeof event.type !== "string" || typeof event.seq !== "number") return null;
  return event as unknown as SessionEvent;
}

export function tileAt(room: RoomJson, x: number, y: number): TileChar {
  return room.tiles[y][x] as TileChar;
}

export function isDoor(room: RoomJson, x: number, y: number): boolean {
  return tileAt(room, x, y) === "d";
}

export function isLocked(room: RoomJson, x: number, y: number): boolean {
  return room.locked.some(([lx, ly]) => lx === x && ly === y);
}

export function withTile(room: RoomJson, x: number, y: number, tile: TileChar): RoomJson {
  const tiles = room.tiles.slice();
  tiles[y] = tiles[y].slice(0, x) + tile + tiles[y].slice(x + 1);
  return { ...room, tiles };
}

export function cloneRoom(room: RoomJson): RoomJson {
  return {
    cols: room.cols,
    rows: room.rows,
    tiles: room.tiles.slice(),
    doors: room.doors.map(([x, y]) => [x, y]),
    locked: room.locked.map(([x, y]) => [x, y]),
  };
}

export function roomsEqual(a: RoomJson, b: RoomJson): boolean {
  return (
    a.cols === b.cols &&
    a.rows === b.rows &&
    a.tiles.join("\n") === b.tiles.join("\n") &&
    JSON.stringify(a.locked) === JSON.stringify(b.locked)
  );
}
