// Live-episode client logic, kept framework-free and testable: a
// latest-key-wins input buffer, a socket state machine, and a pure
// render-model builder (rendering is a function of the latest tick).

import { KEY_MAP, ServerMessage, StartMessage, TickMessage, WorldState } from "./model.js";

export class KeyBuffer {
  private latest: string | null = null;

  press(eventKey: string): boolean {
    const mapped = KEY_MAP[eventKey];
    if (!mapped) return false;
    this.latest = mapped;
    return true;
  }

  take(): string | null {
    const key = this.latest;
    this.latest = null;
    return key;
  }

  peek(): string | null {
    return this.latest;
  }
}

export type ConnectionPhase = "connecting" | "playing" | "ended" | "disconnected";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onopen: (() => void) | null;
}

export interface EpisodeEvents {
  onStart?: (msg: StartMessage) => void;
  onTick?: (msg: TickMessage) => void;
  onEnd?: (status: string, score: number) => void;
  onPhase?: (phase: ConnectionPhase) => void;
}

export class EpisodeConnection {
  phase: ConnectionPhase = "connecting";
  start: StartMessage | null = null;
  lastTick: TickMessage | null = null;
  private nextT = 0;

  constructor(private socket: SocketLike, private events: EpisodeEvents = {}) {
    socket.onopen = () => this.setPhase("connecting");
    socket.onmessage = (ev) => this.handle(JSON.parse(ev.data) as ServerMessage);
    socket.onclose = () => {
      if (this.phase !== "ended") this.setPhase("disconnected");
    };
    socket.onerror = socket.onclose;
  }

  private setPhase(phase: ConnectionPhase) {
    this.phase = phase;
    this.events.onPhase?.(phase);
  }

  private handle(msg: ServerMessage) {
    if (msg.type === "start") {
      this.start = msg;
      this.nextT = msg.state.t;
      this.setPhase("playing");
      this.events.onStart?.(msg);
    } else if (msg.type === "tick") {
      this.lastTick = msg;
      this.nextT = msg.t + 1;
      this.events.onTick?.(msg);
    } else {
      this.setPhase("ended");
      this.events.onEnd?.(msg.status, msg.score);
    }
  }

  sendKey(key: string | null) {
    if (this.phase !== "playing") return;
    this.socket.send(JSON.stringify({ t: this.nextT, key }));
  }

  close() {
    this.socket.close();
  }
}

// -- render model ------------------------------------------------------------

export interface Sprite {
  row: number;
  col: number;
  glyph: string; // cell type or item marker
  label?: string; // pot timer / player facing arrow
  layer: "floor" | "object" | "item" | "player";
}

const FACING_ARROWS = ["↑", "↓", "→", "←"]; // N S E W

export function buildRenderModel(grid: string[], state: WorldState, humanSeat: number): Sprite[] {
  const sprites: Sprite[] = [];
  grid.forEach((rowStr, row) => {
    [...rowStr].forEach((ch, col) => {
      sprites.push({ row, col, glyph: ch === " " ? "floor" : ch, layer: ch === " " ? "floor" : "object" });
    });
  });
  for (const [key, pot] of Object.entries(state.pots)) {
    const [row, col] = key.split(",").map(Number);
    const label = pot.state === "cooking" ? `${pot.timer}` : pot.state === "ready" ? "!" : `${pot.contents.length}/3`;
    sprites.push({ row, col, glyph: `pot:${pot.state}`, label, layer: "item" });
  }
  for (const [key, item] of Object.entries(state.counters)) {
    const [row, col] = key.split(",").map(Number);
    sprites.push({ row, col, glyph: `item:${item.kind}`, layer: "item" });
  }
  state.players.forEach((p, seat) => {
    sprites.push({
      row: p.pos[0],
      col: p.pos[1],
      glyph: seat === humanSeat ? "player:human" : "player:ai",
      label: FACING_ARROWS[p.facing] + (p.held ? ` ${p.held.kind}` : ""),
      layer: "player",
    });
  });
  return sprites;
}
