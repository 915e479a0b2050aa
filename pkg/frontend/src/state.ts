/** Editor state and pure reducers; all painting rules live here.
 *
 * Door tiles are sacred: no brush ever touches them. Lock painting toggles
 * the preserved-tile overlay instead of changing tiles.
 */

import {
  DimensionRef,
  ElitesPayload,
  RoomJson,
  TileChar,
  cloneRoom,
  isDoor,
  isLocked,
  tileAt,
  withTile,
} from "./protocol.js";

export type BrushSize = "single" | "cross5";

export interface Brush {
  tile: TileChar; // "d" is not paintable; guarded below
  size: BrushSize;
  lockMode: boolean;
  bucketMode: boolean;
}

export type Connection = "connecting" | "live" | "stale";

export interface EditorState {
  room: RoomJson;
  brush: Brush;
  activeDims: [DimensionRef, DimensionRef];
  suggestions: ElitesPayload | null;
  connection: Connection;
  statusLine: string;
}

export const DEFAULT_BRUSH: Brush = {
  tile: "w",
  size: "single",
  lockMode: false,
  bucketMode: false,
};

export function initialState(room: RoomJson): EditorState {
  return {
    room,
    brush: { ...DEFAULT_BRUSH },
    activeDims: [
      { kind: "nsp", granularity: 5 },
      { kind: "symmetry", granularity: 5 },
    ],
    suggestions: null,
    connection: "connecting",
    statusLine: "",
  };
}

function inBounds(room: RoomJson, x: number, y: number): boolean {
  return x >= 0 && x < room.cols && y >= 0 && y < room.rows;
}

function brushCells(room: RoomJson, x: number, y: number, size: BrushSize): [number, number][] {
  const cells: [number, number][] = [[x, y]];
  if (size === "cross5") {
    cells.push([x + 1, y], [x - 1, y], [x, y + 1], [x, y - 1]);
  }
  return cells.filter(([cx, cy]) => inBounds(room, cx, cy));
}

function bucketCells(room: RoomJson, x: number, y: number): [number, number][] {
  // all 4-connected tiles sharing the clicked tile's kind
  const start = tileAt(room, x, y);
  const seen = new Set<string>([`${x},${y}`]);
  const queue: [number, number][] = [[x, y]];
  const out: [number, number][] = [];
  while (queue.length) {
    const [cx, cy] = queue.pop()!;
    out.push([cx, cy]);
    for (const [nx, ny] of [
      [cx + 1, cy],
      [cx - 1, cy],
      [cx, cy + 1],
      [cx, cy - 1],
    ] as [number, number][]) {
      const key = `${nx},${ny}`;
      if (inBounds(room, nx, ny) && !seen.has(key) && tileAt(room, nx, ny) === start) {
        seen.add(key);
        queue.push([nx, ny]);
      }
    }
  }
  return out;
}

/** Apply one brush interaction; returns the state unchanged if nothing painted. */
export function paint(state: EditorState, x: number, y: number): EditorState {
  const { brush } = state;
  if (!inBounds(state.room, x, y)) return state;
  const cells = brush.bucketMode
    ? bucketCells(state.room, x, y)
    : brushCells(state.room, x, y, brush.size);
  if (brush.lockMode) {
    return toggleLock(state, cells);
  }
  let room = state.room;
  for (const [cx, cy] of cells) {
    if (isDoor(room, cx, cy)) continue;
    if (tileAt(room, cx, cy) !== brush.tile) {
      room = withTile(room, cx, cy, brush.tile);
    }
  }
  if (room === state.room) return state;
  return { ...state, room };
}

/** Mark or unmark tiles as preserved in every generated suggestion. */
export function toggleLock(state: EditorState, cells: [number, number][]): EditorState {
  const locked = state.room.locked.map(([x, y]) => [x, y] as [number, number]);
  let changed = false;
  for (const [x, y] of cells) {
    if (isDoor(state.room, x, y)) continue;
    const at = locked.findIndex(([lx, ly]) => lx === x && ly === y);
    if (at >= 0) locked.splice(at, 1);
    else locked.push([x, y]);
    changed = true;
  }
  if (!changed) return state;
  locked.sort((a, b) => a[1] - b[1] || a[0] - b[0]);
  return { ...state, room: { ...state.room, locked } };
}

export function applyBroadcast(state: EditorState, payload: ElitesPayload): EditorState {
  return { ...state, suggestions: payload, connection: "live" };
}

/** TargetEcho replaces the edited room with the applied suggestion. */
export function applyTargetEcho(state: EditorState, room: RoomJson): EditorState {
  return { ...state, room: cloneRoom(room) };
}

export function setDims(state: EditorState, dims: [DimensionRef, DimensionRef]): EditorState {
  return { ...state, activeDims: dims };
}

export function setConnection(state: EditorState, connection: Connection): EditorState {
  return { ...state, connection };
}

/** Every suggestion must show the designer's locked tiles untouched. */
export function lockedTilesConsistent(state: EditorState): boolean {
  if (!state.suggestions) return true;
  for (const cell of state.suggestions.cells) {
    if (!cell.elite) continue;
    for (const [x, y] of state.room.locked) {
      if (cell.elite[y][x] !== state.room.tiles[y][x]) return false;
    }
  }
  return true;
}

export function doorsIntact(state: EditorState): boolean {
  return state.room.doors.every(([x, y]) => isDoor(state.room, x, y));
}

export { isLocked };
