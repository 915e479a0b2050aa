/** Pure HTML renderers: each function maps state/payload to a markup string.
 *
 * Keeping rendering pure makes broadcast drawing snapshot-testable and
 * guarantees the view is a function of the last payload.
 */

import { BroadcastCell, ElitesPayload, RoomJson, isLocked } from "./protocol.js";
import { EditorState } from "./state.js";

export const TILE_CLASSES: Record<string, string> = {
  f: "tile-floor",
  w: "tile-wall",
  t: "tile-treasure",
  e: "tile-enemy",
  d: "tile-door",
};

export function renderRoom(room: RoomJson): string {
  const rows: string[] = [];
  for (let y = 0; y < room.rows; y++) {
    const cells: string[] = [];
    for (let x = 0; x < room.cols; x++) {
      const tile = room.tiles[y][x];
      const locked = isLocked(room, x, y) ? " locked" : "";
      cells.push(
        `<div class="tile ${TILE_CLASSES[tile]}${locked}" data-x="${x}" data-y="${y}"></div>`
      );
    }
    rows.push(`<div class="tile-row">${cells.join("")}</div>`);
  }
  return `<div class="room-grid" style="--cols:${room.cols}">${rows.join("")}</div>`;
}

function renderMiniRoom(tiles: string[]): string {
  const rows = tiles
    .map((row) => {
      const cells = row
        .split("")
        .map((tile) => `<div class="mini-tile ${TILE_CLASSES[tile]}"></div>`)
        .join("");
      return `<div class="tile-row">${cells}</div>`;
    })
    .join("");
  return `<div class="mini-room" style="--cols:${tiles[0]?.length ?? 0}">${rows}</div>`;
}

function binLabel(bin: number, granularity: number): string {
  const lo = (bin / granularity).toFixed(1);
  const hi = ((bin + 1) / granularity).toFixed(1);
  return `[${lo},${hi})`;
}

/** The g x g elite grid: x bins across, y bins up, fitness badge per cell. */
export function renderSuggestionGrid(payload: ElitesPayload): string {
  if (payload.dims.length !== 2) {
    return `<div class="grid-note">archive uses ${payload.dims.length} dimensions; pick two to view the grid</div>`;
  }
  const [dx, dy] = payload.dims;
  const byCoords = new Map<string, BroadcastCell>();
  for (const cell of payload.cells) {
    byCoords.set(cell.coords.join(","), cell);
  }
  const rows: string[] = [];
  for (let y = dy.granularity - 1; y >= 0; y--) {
    const cells: string[] = [
      `<div class="axis-label y-label">${dy.kind} ${binLabel(y, dy.granularity)}</div>`,
    ];
    for (let x = 0; x < dx.granularity; x++) {
      const cell = byCoords.get(`${x},${y}`);
      if (cell && cell.elite && cell.fitness !== null) {
        cells.push(
          `<div class="elite-cell" data-cell="${x},${y}">` +
            `<span class="fitness-badge">${cell.fitness.toFixed(2)}</span>` +
            renderMiniRoom(cell.elite) +
            `<button class="apply-btn" data-cell="${x},${y}">apply</button></div>`
        );
      } else {
        cells.push(`<div class="elite-cell empty">no feasible elite</div>`);
      }
    }
    rows.push(`<div class="grid-row">${cells.join("")}</div>`);
  }
  const xLabels = [`<div class="axis-label"></div>`];
  for (let x = 0; x < dx.granularity; x++) {
    xLabels.push(`<div class="axis-label">${dx.kind} ${binLabel(x, dx.granularity)}</div>`);
  }
  rows.push(`<div class="grid-row">${xLabels.join("")}</div>`);
  return `<div class="suggestion-grid" data-generation="${payload.generation}">${rows.join("")}</div>`;
}

export function renderStatus(state: EditorState): string {
  const badge =
    state.connection === "live"
      ? `<span class="conn live">live</span>`
      : state.connection === "stale"
        ? `<span class="conn stale">connection lost - showing stale data</span>`
        : `<span class="conn">connecting...</span>`;
  const generation = state.suggestions ? `generation ${state.suggestions.generation}` : "";
  return `${badge} <span class="status-line">${generation} ${state.statusLine}</span>`;
}
