// App shell: session setup, the live play view, and the between-round
// policy panel (tree editor, read-only viewer, or pause page by mode).

import { Api, ApiError } from "./api.js";
import { EditorPanel } from "./editor-ui.js";
import { SessionView, StartMessage, TickMessage } from "./model.js";
import { EpisodeConnection, KeyBuffer, buildRenderModel } from "./play.js";
import { CELL, drawSprites } from "./render.js";

const api = new Api("");
const $ = (id: string) => document.getElementById(id)!;

let session: SessionView | null = null;
let connection: EpisodeConnection | null = null;
let tickTimer: number | null = null;
const keys = new KeyBuffer();

function status(text: string) {
  $("status").textContent = text;
}

window.addEventListener("keydown", (ev) => {
  if (keys.press(ev.key)) ev.preventDefault();
});

$("create").onclick = async () => {
  const mode = ($("mode") as HTMLSelectElement).value;
  const layout = ($("layout") as HTMLSelectElement).value;
  const tutorial = ($("tutorial") as HTMLInputElement).checked;
  try {
    session = await api.createSession({
      mode: tutorial ? "static-blackbox" : mode,
      layout,
      tutorial,
    });
    status(`session ${session.id} (${tutorial ? "tutorial" : mode})`);
    await refreshSession();
  } catch (err) {
    status(err instanceof ApiError ? err.message : String(err));
  }
};

async function refreshSession() {
  if (!session) return;
  session = await api.session(session.id);
  $("session-info").textContent =
    `round ${session.iteration}/${session.max_iterations} | ` +
    `mode ${session.tutorial ? "tutorial" : session.mode} | score view below`;
  ($("play") as HTMLButtonElement).disabled =
    session.phase !== "idle" || session.iteration > session.max_iterations;
  await renderPolicyPanel();
}

async function renderPolicyPanel() {
  const panel = $("policy-panel");
  if (!session) return;
  if (!session.can_view_policy) {
    // Blackbox and fcp conditions see a transitionary pause page only.
    panel.innerHTML = `<div class="pause-page">Take a short break.
      Press <b>Play round</b> when you are ready for the next episode.</div>`;
    return;
  }
  const editor = new EditorPanel(api, panel, session.id, !session.can_edit_policy, status);
  await editor.load();
  if (session.mode === "ai-led-mod" && session.episodes_completed > 0) {
    const bar = document.createElement("div");
    const btn = document.createElement("button");
    btn.textContent = "Let the AI optimize its policy";
    btn.onclick = () => void runOptimize(btn);
    bar.appendChild(btn);
    panel.appendChild(bar);
  }
}

async function runOptimize(btn: HTMLButtonElement) {
  if (!session) return;
  btn.disabled = true;
  try {
    await api.startOptimize(session.id);
    status("optimizing...");
    const poll = window.setInterval(async () => {
      const s = await api.optimizeStatus(session!.id);
      status(`optimizing: ${s.detail} (${Math.round(s.progress * 100)}%)`);
      if (s.status !== "running") {
        window.clearInterval(poll);
        status(s.status === "done"
          ? (s.accepted ? "AI kept its improved policy" : "AI kept the original policy")
          : `optimization failed: ${s.detail}`);
        await refreshSession();
      }
    }, 500);
  } catch (err) {
    btn.disabled = false;
    status(err instanceof ApiError ? err.message : String(err));
  }
}

$("play").onclick = async () => {
  if (!session) return;
  try {
    const info = await api.startEpisode(session.id);
    openEpisode(info.socket_path, info.tick_rate, info.horizon);
  } catch (err) {
    status(err instanceof ApiError ? err.message : String(err));
  }
};

function openEpisode(socketPath: string, tickRate: number, horizon: number) {
  const proto = location.protocol === "https:" ? "wss:" : "ws:";
  const socket = new WebSocket(`${proto}//${location.host}${socketPath}`);
  const canvas = $("board") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  $("reconnect").hidden = true;
  let grid: string[] = [];
  let humanSeat = 0;

  connection = new EpisodeConnection(socket as never, {
    onStart: (msg: StartMessage) => {
      grid = msg.grid;
      humanSeat = msg.human_seat;
      canvas.width = grid[0].length * CELL;
      canvas.height = grid.length * CELL;
      drawSprites(ctx, buildRenderModel(grid, msg.state, humanSeat));
      $("hud").textContent = `score 0 | ${horizon} ticks left`;
      // Lockstep servers tick per message; timed servers expect inputs
      // whenever they arrive. Either way, buffer the latest key per tick.
      const interval = tickRate > 0 ? 1000 / tickRate : 50;
      tickTimer = window.setInterval(() => connection?.sendKey(keys.take()), interval);
    },
    onTick: (msg: TickMessage) => {
      drawSprites(ctx, buildRenderModel(grid, msg.state, humanSeat));
      const left = horizon - msg.state.t;
      let hud = `score ${msg.score} | ${left} ticks left`;
      if (msg.ai_macro !== undefined) hud += ` | AI: ${msg.ai_macro}`;
      $("hud").textContent = hud;
    },
    onEnd: async (endStatus, score) => {
      if (tickTimer !== null) window.clearInterval(tickTimer);
      status(`episode ${endStatus}; score ${score}`);
      await refreshSession();
    },
    onPhase: (phase) => {
      if (phase === "disconnected") {
        if (tickTimer !== null) window.clearInterval(tickTimer);
        $("reconnect").hidden = false;
      }
    },
  });
}

$("reconnect-btn").onclick = async () => {
  $("reconnect").hidden = true;
  await refreshSession();
  status("episode aborted; start a new round when ready");
};

(async () => {
  try {
    const { layouts } = await api.layouts();
    const sel = $("layout") as HTMLSelectElement;
    for (const name of layouts) {
      const opt = document.createElement("option");
      opt.value = opt.textContent = name;
      sel.appendChild(opt);
    }
  } catch {
    status("service unreachable");
  }
})();
