/** Browser entry point: wires DOM controls to the state reducers and client. */

import { SessionClient } from "./client.js";
import { DIMENSION_NAMES, DimensionName, RoomJson, TileChar } from "./protocol.js";
import {
  EditorState,
  applyBroadcast,
  applyTargetEcho,
  initialState,
  paint,
  setConnection,
  setDims,
} from "./state.js";
import { renderRoom, renderStatus, renderSuggestionGrid } from "./render.js";

const serviceUrl =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8008";

let state: EditorState;
let painting = false;

const roomPane = document.getElementById("room")!;
const gridPane = document.getElementById("suggestions")!;
const statusPane = document.getElementById("status")!;

const client = new SessionClient(serviceUrl, {
  onEvent: (event) => {
    if (event.type === "ElitesUpdated") {
      state = applyBroadcast(state, event.payload);
      drawSuggestions();
      drawStatus();
    } else if (event.type === "TargetEcho") {
      state = applyTargetEcho(state, event.payload.room);
      drawRoom();
    } else if (event.type === "Error") {
      state.statusLine = `${event.payload.code}: ${event.payload.message}`;
      drawStatus();
    }
  },
  onConnection: (live) => {
    state = setConnection(state, live ? "live" : "stale");
    drawStatus();
  },
});

function drawRoom(): void {
  roomPane.innerHTML = renderRoom(state.room);
}

function drawSuggestions(): void {
  if (state.suggestions) gridPane.innerHTML = renderSuggestionGrid(state.suggestions);
}

function drawStatus(): void {
  statusPane.innerHTML = renderStatus(state);
}

function paintAt(target: EventTarget | null, ctrlKey: boolean): void {
  if (!(target instanceof HTMLElement) || target.dataset.x === undefined) return;
  state.brush.bucketMode = ctrlKey;
  const next = paint(state, Number(target.dataset.x), Number(target.dataset.y));
  if (next !== state) {
    state = next;
    drawRoom();
    client.queueTarget(state.room);
  }
}

roomPane.addEventListener("mousedown", (ev) => {
  painting = true;
  paintAt(ev.target, ev.ctrlKey);
});
roomPane.addEventListener("mouseover", (ev) => {
  if (painting) paintAt(ev.target, (ev as MouseEvent).ctrlKey);
});
document.addEventListener("mouseup", () => {
  painting = false;
});

gridPane.addEventListener("click", (ev) => {
  const target = ev.target as HTMLElement;
  if (target.classList.contains("apply-btn") && target.dataset.cell) {
    void client.applySuggestion(target.dataset.cell.split(",").map(Number));
  }
});

function bindControls(): void {
  for (const input of document.querySelectorAll<HTMLInputElement>("input[name=tile]")) {
    input.addEventListener("change", () => {
      state.brush.tile = input.value as TileChar;
    });
  }
  for (const input of document.querySelectorAll<HTMLInputElement>("input[name=size]")) {
    input.addEventListener("change", () => {
      state.brush.size = input.value as "single" | "cross5";
    });
  }
  const lock = document.getElementById("lock-mode") as HTMLInputElement;
  lock.addEventListener("change", () => {
    state.brush.lockMode = lock.checked;
  });

  const dimX = document.getElementById("dim-x") as HTMLSelectElement;
  const dimY = document.getElementById("dim-y") as HTMLSelectElement;
  const gran = document.getElementById("granularity") as HTMLSelectElement;
  for (const select of [dimX, dimY]) {
    for (const name of DIMENSION_NAMES) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      select.appendChild(option);
    }
  }
  dimX.value = "nsp";
  dimY.value = "symmetry";

  document.getElementById("set-dims")!.addEventListener("click", () => {
    if (dimX.value === dimY.value) {
      state.statusLine = "pick two different dimensions";
      drawStatus();
      return;
    }
    const granularity = Number(gran.value);
    const dims: [DimensionName, DimensionName] = [
      dimX.value as DimensionName,
      dimY.value as DimensionName,
    ];
    state = setDims(state, [
      { kind: dims[0], granularity },
      { kind: dims[1], granularity },
    ]);
    void client.setDimensions(state.activeDims);
  });

  document.getElementById("restart")!.addEventListener("click", () => {
    void client.restart();
  });
}

async function start(): Promise<void> {
  const target: RoomJson = await client.open({});
  state = initialState(target);
  bindControls();
  drawRoom();
  drawStatus();
}

void start();
