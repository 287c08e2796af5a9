import { describe, expect, it } from "vitest";

import { WorldState } from "../src/model.js";
import { EpisodeConnection, KeyBuffer, SocketLike, buildRenderModel } from "../src/play.js";

class FakeSocket implements SocketLike {
  sent: string[] = [];
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  onopen: (() => void) | null = null;

  send(data: string) {
    this.sent.push(data);
  }

  close() {
    this.onclose?.();
  }

  push(obj: unknown) {
    this.onmessage?.({ data: JSON.stringify(obj) });
  }
}

const state0: WorldState = {
  players: [
    { pos: [2, 1], facing: 0, held: null },
    { pos: [2, 3], facing: 0, held: { kind: "onion", contents: [] } },
  ],
  pots: { "0,3": { contents: [], timer: null, state: "empty" } },
  counters: { "2,2": { kind: "dish", contents: [] } },
  t: 0,
  score: 0,
};

describe("KeyBuffer", () => {
  it("keeps only the most recent key per tick", () => {
    const buf = new KeyBuffer();
    expect(buf.press("ArrowUp")).toBe(true);
    expect(buf.press("ArrowLeft")).toBe(true);
    expect(buf.take()).toBe("left");
    expect(buf.take()).toBeNull();
  });

  it("maps space to interact and ignores unknown keys", () => {
    const buf = new KeyBuffer();
    expect(buf.press(" ")).toBe(true);
    expect(buf.take()).toBe("space");
    expect(buf.press("x")).toBe(false);
    expect(buf.take()).toBeNull();
  });
});

describe("EpisodeConnection", () => {
  const startMsg = {
    type: "start", episode_id: 1, grid: ["XXX", "X X", "XXX"],
    horizon: 200, human_seat: 0, state: state0,
  };

  it("tracks phases start -> playing -> ended", () => {
    const sock = new FakeSocket();
    const phases: string[] = [];
    const conn = new EpisodeConnection(sock, { onPhase: (p) => phases.push(p) });
    sock.push(startMsg);
    expect(conn.phase).toBe("playing");
    sock.push({ type: "tick", t: 0, score: 0, rewards: [0, 0], done: false, state: state0 });
    sock.push({ type: "end", status: "completed", score: 42 });
    expect(conn.phase).toBe("ended");
    expect(phases).toContain("playing");
    sock.close(); // post-end close must not flip to disconnected
    expect(conn.phase).toBe("ended");
  });

  it("stamps outgoing keys with the next tick index", () => {
    const sock = new FakeSocket();
    const conn = new EpisodeConnection(sock);
    conn.sendKey("up"); // ignored before start
    expect(sock.sent).toHaveLength(0);
    sock.push(startMsg);
    conn.sendKey("up");
    expect(JSON.parse(sock.sent[0])).toEqual({ t: 0, key: "up" });
    sock.push({ type: "tick", t: 0, score: 0, rewards: [0, 0], done: false,
                state: { ...state0, t: 1 } });
    conn.sendKey(null);
    expect(JSON.parse(sock.sent[1])).toEqual({ t: 1, key: null });
  });

  it("shows the reconnect state on mid-episode close", () => {
    const sock = new FakeSocket();
    const conn = new EpisodeConnection(sock);
    sock.push(startMsg);
    sock.close();
    expect(conn.phase).toBe("disconnected");
  });
});

describe("buildRenderModel", () => {
  const grid = ["XXPX", "X  X", "XXXX"];

  it("is a pure function of the tick state", () => {
    const a = buildRenderModel(grid, state0, 0);
    const b = buildRenderModel(grid, state0, 0);
    expect(a).toEqual(b);
    expect(JSON.stringify(state0)).toContain('"t":0'); // input untouched
  });

  it("places players, pots, and counter items", () => {
    const sprites = buildRenderModel(grid, state0, 0);
    const players = sprites.filter((s) => s.layer === "player");
    expect(players).toHaveLength(2);
    expect(players[0].glyph).toBe("player:human");
    expect(players[1].label).toContain("onion");
    const pot = sprites.find((s) => s.glyph.startsWith("pot:"))!;
    expect(pot.row).toBe(0);
    expect(pot.col).toBe(3);
    expect(pot.label).toBe("0/3");
    expect(sprites.some((s) => s.glyph === "item:dish")).toBe(true);
  });

  it("labels cooking pots with the timer", () => {
    const cooking: WorldState = {
      ...state0,
      pots: { "0,3": { contents: ["onion", "onion", "onion"], timer: 12, state: "cooking" } },
    };
    const sprites = buildRenderModel(grid, cooking, 0);
    const pot = sprites.find((s) => s.glyph === "pot:cooking")!;
    expect(pot.label).toBe("12");
  });
});
