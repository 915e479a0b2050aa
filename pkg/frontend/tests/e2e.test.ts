/**
 * End-to-end loop against the real session service: paint, lock, receive a
 * refreshed grid, apply a suggestion, and verify the archive adopts it.
 */
import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SessionClient } from "../src/client.js";
import { ElitesPayload, RoomJson, SessionEvent } from "../src/protocol.js";
import {
  EditorState,
  applyBroadcast,
  applyTargetEcho,
  initialState,
  lockedTilesConsistent,
  paint,
  toggleLock,
} from "../src/state.js";

const PUBLISH_GEN = 10;

let server: ChildProcess;
let baseUrl: string;

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "qd-e2e-"));
  const configPath = join(dir, "serve.json");
  writeFileSync(
    configPath,
    JSON.stringify({
      engine: {
        popSize: 80,
        publishGen: PUBLISH_GEN,
        rngSeed: 5,
        granularity: 5,
        dims: ["nsp", "symmetry"],
      },
    })
  );
  server = spawn("python3", ["-m", "dungeonqd.cli", "serve", "--port", "0", "--config", configPath]);
  baseUrl = await new Promise<string>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("service never came up")), 20000);
    server.stdout!.on("data", (chunk: Buffer) => {
      const match = /listening on (http:\/\/[\d.]+:\d+)/.exec(chunk.toString());
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    server.on("exit", () => reject(new Error("service exited early")));
  });
}, 30000);

afterAll(() => {
  server?.kill();
});

describe("editor round trip", () => {
  it("paint, lock, refresh, apply suggestion, archive adopts it", async () => {
    const events: SessionEvent[] = [];
    const waiters: ((event: SessionEvent) => void)[] = [];
    const client = new SessionClient(baseUrl, {
      onEvent: (event) => {
        events.push(event);
        for (const waiter of waiters.splice(0)) waiter(event);
      },
    });

    function waitFor<T>(
      pick: (event: SessionEvent) => T | null,
      timeoutMs = 60000
    ): Promise<T> {
      return new Promise((resolve, reject) => {
        for (const event of events) {
          const got = pick(event);
          if (got !== null) return resolve(got);
        }
        const deadline = setTimeout(
          () => reject(new Error("timed out waiting for event")),
          timeoutMs
        );
        const check = (event: SessionEvent) => {
          const got = pick(event);
          if (got !== null) {
            clearTimeout(deadline);
            resolve(got);
          } else {
            waiters.push(check);
          }
        };
        waiters.push(check);
      });
    }

    const broadcastAfter = (generation: number) =>
      waitFor((e) =>
        e.type === "ElitesUpdated" && e.payload.generation > generation ? e.payload : null
      );

    const target = await client.open({});
    let state: EditorState = initialState(target as RoomJson);

    const first = await broadcastAfter(0);
    state = applyBroadcast(state, first);

    // lock a small region, then paint a wall edit beside it
    state = toggleLock(state, [
      [4, 2],
      [5, 2],
    ]);
    state.brush.tile = "w";
    state = paint(state, 7, 1);
    state = paint(state, 7, 2);
    client.queueTarget(state.room);
    await new Promise((r) => setTimeout(r, 200)); // let the debounce fire
    await client.flushTarget();

    // refreshed grid within two broadcast cycles of the edit
    const editedAt = ((): number => {
      const latest = events.filter((e) => e.type === "ElitesUpdated").pop();
      return latest && latest.type === "ElitesUpdated" ? latest.payload.generation : 0;
    })();
    const refreshed = await waitFor((e) =>
      e.type === "ElitesUpdated" &&
      e.payload.generation > editedAt &&
      e.payload.generation <= editedAt + 2 * PUBLISH_GEN
        ? e.payload
        : null
    );
    state = applyBroadcast(state, refreshed);

    // locked tiles appear unchanged in every rendered suggestion
    const settled = await broadcastAfter(refreshed.generation + PUBLISH_GEN);
    state = applyBroadcast(state, settled);
    expect(lockedTilesConsistent(state)).toBe(true);

    // apply the fittest suggestion
    const candidates = state.suggestions!.cells.filter((c) => c.elite && c.fitness !== null);
    expect(candidates.length).toBeGreaterThan(0);
    const chosen = candidates.reduce((a, b) => (b.fitness! > a.fitness! ? b : a));
    await client.applySuggestion(chosen.coords);
    const echoed = await waitFor((e) =>
      e.type === "TargetEcho" ? e.payload.room : null
    );
    state = applyTargetEcho(state, echoed);
    expect(state.room.tiles).toEqual(chosen.elite);

    // the subsequent broadcasts carry the applied room as that cell's elite
    const adopted = await waitFor((e) => {
      if (e.type !== "ElitesUpdated" || e.payload.generation <= settled.generation) return null;
      const cell = e.payload.cells.find(
        (c) => c.coords.join(",") === chosen.coords.join(",")
      );
      return cell && cell.elite && cell.elite.join("\n") === chosen.elite!.join("\n")
        ? e.payload
        : null;
    });
    expect(adopted.generation).toBeGreaterThan(settled.generation);

    // locked tiles stay pinned through the applied suggestion too
    expect(lockedTilesConsistent(state)).toBe(true);
    await client.close();
  }, 90000);
});
