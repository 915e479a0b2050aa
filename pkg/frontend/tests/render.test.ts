import { describe, expect, it } from "vitest";

import { ElitesPayload, RoomJson } from "../src/protocol.js";
import { renderRoom, renderStatus, renderSuggestionGrid } from "../src/render.js";
import { applyBroadcast, initialState, setConnection } from "../src/state.js";

const room: RoomJson = {
  cols: 4,
  rows: 3,
  tiles: ["ffwf", "dfff", "fftf"],
  doors: [[0, 1]],
  locked: [[2, 0]],
};

const payload: ElitesPayload = {
  generation: 300,
  dims: [
    { kind: "nsp", granularity: 2 },
    { kind: "symmetry", granularity: 2 },
  ],
  cells: [
    { coords: [0, 1], feasible: 2, infeasible: 0, fitness: 0.875, elite: ["ffff", "dfff", "ffff"] },
    { coords: [1, 0], feasible: 1, infeasible: 4, fitness: 0.5, elite: ["wwww", "dfff", "ffff"] },
  ],
};

describe("renderRoom", () => {
  it("draws every tile with its kind and lock overlay", () => {
    const html = renderRoom(room);
    expect(html.match(/class="tile /g)?.length).toBe(12);
    expect(html).toContain("tile-door");
    expect(html).toContain("tile-treasure");
    expect(html).toContain('tile-wall locked" data-x="2" data-y="0"');
  });
});

describe("renderSuggestionGrid", () => {
  it("is pure in its payload", () => {
    expect(renderSuggestionGrid(payload)).toBe(renderSuggestionGrid(payload));
  });

  it("places elites by bin with fitness badges and empty markers", () => {
    const html = renderSuggestionGrid(payload);
    expect(html).toContain('data-generation="300"');
    expect(html).toContain("0.88"); // badge, two decimals
    expect(html.match(/no feasible elite/g)?.length).toBe(2);
    expect(html).toContain('data-cell="0,1"');
  });

  it("labels axes with dimension names and bin ranges", () => {
    const html = renderSuggestionGrid(payload);
    expect(html).toContain("nsp [0.0,0.5)");
    expect(html).toContain("symmetry [0.5,1.0)");
  });

  it("refuses to draw more than two dimensions", () => {
    const wide = { ...payload, dims: [...payload.dims, { kind: "nmp" as const, granularity: 2 }] };
    expect(renderSuggestionGrid(wide)).toContain("pick two");
  });
});

describe("renderStatus", () => {
  it("shows the stale banner after a dropped connection", () => {
    let state = initialState(room);
    state = applyBroadcast(state, payload);
    state = setConnection(state, "stale");
    const html = renderStatus(state);
    expect(html).toContain("stale");
    expect(html).toContain("generation 300");
  });
});
