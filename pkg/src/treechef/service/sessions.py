"""Session state machine: live episodes, between-episode edits, and
asynchronous AI-led optimization jobs.

Phases: idle -> playing (one episode loop owns the environment) -> idle;
idle -> optimizing -> idle. Edits are accepted only while idle and only
in human-led-mod sessions. Many sessions run concurrently; each is
internally serialized by its phase gate.
"""

from __future__ import annotations

import asyncio
import os
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np

from ..agents import CrispTreePolicy
from ..env import PrimitiveAction, reset, step
from ..env.layout import Layout
from ..episode_log import EpisodeLogWriter, state_to_dict
from ..features import featurize
from ..planning import MACRO_NAMES, MacroAction, plan_step
from ..policy import PolicyDocument, apply_ops, op_from_payload
from ..training.config import TrainConfig
from ..training.rollout import applicable_mask
from .config import ServiceConfig
from .registry import NoPretrainedPolicy, PolicyRegistry
from .schemas import INTERPRETABLE_MODES

KEY_TO_ACTION = {
    "up": PrimitiveAction.NORTH,
    "down": PrimitiveAction.SOUTH,
    "left": PrimitiveAction.WEST,
    "right": PrimitiveAction.EAST,
    "space": PrimitiveAction.INTERACT,
    "interact": PrimitiveAction.INTERACT,
    "stay": PrimitiveAction.STAY,
}


class SessionError(RuntimeError):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class OptimizeJob:
    id: str
    status: str = "running"
    progress: float = 0.0
    detail: str = ""
    accepted: bool | None = None
    events: list[dict] = field(default_factory=list)

    def push(self, detail: str, progress: float):
        self.progress = progress
        self.detail = detail
        self.events.append({"status": self.status, "progress": progress, "detail": detail})


class Session:
    def __init__(self, sid: str, mode: str, layout: Layout, cfg: ServiceConfig,
                 doc: PolicyDocument | None, dense, human_seat: int, seed: int,
                 tutorial: bool = False):
        self.id = sid
        self.mode = mode
        self.tutorial = tutorial
        self.layout = layout
        self.cfg = cfg
        self.doc = doc
        self.dense = dense
        self.human_seat = human_seat
        self.ai_seat = 1 - human_seat
        self.seed = seed
        self.iteration = 1
        self.max_iterations = cfg.max_iterations
        self.episodes_completed = 0
        self.phase = "idle"
        self.pending_episode: int | None = None
        self.episode_logs: list[str] = []
        self.job: OptimizeJob | None = None
        self.log_dir = os.path.join(cfg.data_dir, "sessions", sid)
        os.makedirs(self.log_dir, exist_ok=True)

    # -- gating ----------------------------------------------------------------

    @property
    def can_view_policy(self) -> bool:
        return self.mode in INTERPRETABLE_MODES and not self.tutorial

    @property
    def can_edit_policy(self) -> bool:
        return self.mode == "human-led-mod"

    def require_idle(self):
        if self.phase != "idle":
            raise SessionError(409, f"session is {self.phase}; wait for the episode to finish")

    def view_policy(self) -> PolicyDocument:
        if not self.can_view_policy:
            raise SessionError(403, f"mode {self.mode} does not expose the policy")
        self.require_idle()
        return self.doc

    def submit_edit(self, ops_payload: list[dict], parent_hash: str | None) -> PolicyDocument:
        if not self.can_edit_policy:
            raise SessionError(403, f"mode {self.mode} does not accept edits")
        self.require_idle()
        ops = [op_from_payload(p) for p in ops_payload]
        self.doc = apply_ops(self.doc, ops, expected_parent=parent_hash)
        return self.doc

    def start_episode(self) -> int:
        self.require_idle()
        if self.iteration > self.max_iterations:
            raise SessionError(409, f"all {self.max_iterations} iterations played")
        if self.pending_episode is not None:
            raise SessionError(409, "an episode is already pending")
        self.pending_episode = self.iteration
        return self.iteration

    def ai_policy(self):
        if self.tutorial:
            from ..agents import RandomPolicy

            return RandomPolicy()
        if self.mode == "fcp":
            from ..training.policies import DenseAgent

            return DenseAgent(self.dense)
        return CrispTreePolicy(self.doc.tree)

    # -- episode loop ------------------------------------------------------------

    async def run_episode_ws(self, websocket, episode_id: int):
        """Drive one live episode over an accepted websocket.

        tick_rate > 0: fixed-rate loop pairing the latest buffered human
        key (default Stay) with the AI's planned primitive. tick_rate == 0:
        lockstep, one tick per received client message.
        """
        if self.pending_episode != episode_id:
            raise SessionError(409, "episode not pending")
        self.pending_episode = None
        self.phase = "playing"
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, episode_id]))
        ai = self.ai_policy()
        state = reset(self.layout, self.layout.horizon)
        path = os.path.join(self.log_dir, f"episode_{episode_id:03d}.jsonl")
        lockstep = self.cfg.tick_rate <= 0
        interval = 0.0 if lockstep else 1.0 / self.cfg.tick_rate
        latest_key: list[str | None] = [None]
        tick_event = asyncio.Event()
        disconnected = asyncio.Event()

        async def receiver():
            try:
                while True:
                    msg = await websocket.receive_json()
                    key = msg.get("key")
                    if key is not None:
                        latest_key[0] = str(key)
                    tick_event.set()
            except Exception:
                disconnected.set()
                tick_event.set()

        recv_task = asyncio.create_task(receiver())
        status = "completed"
        try:
            with open(path, "w") as sink:
                writer = EpisodeLogWriter(
                    sink, self.layout, self.layout.horizon,
                    seats={str(self.human_seat): "human", str(self.ai_seat): f"ai:{self.mode}"},
                    meta={"session": self.id, "episode": episode_id, "seed": self.seed},
                )
                await websocket.send_json({
                    "type": "start",
                    "episode_id": episode_id,
                    "grid": list(self.layout.grid),
                    "horizon": self.layout.horizon,
                    "human_seat": self.human_seat,
                    "state": state_to_dict(state),
                })
                while not state.done:
                    if lockstep:
                        await tick_event.wait()
                        tick_event.clear()
                    else:
                        await asyncio.sleep(interval)
                    if disconnected.is_set():
                        status = "disconnected"
                        break
                    key = latest_key[0]
                    latest_key[0] = None
                    human_act = KEY_TO_ACTION.get(key or "stay", PrimitiveAction.STAY)
                    x = featurize(state, self.ai_seat)
                    mask = applicable_mask(state, self.ai_seat)
                    macro, _, _ = ai.choose(state, self.ai_seat, x, mask, rng)
                    ps = plan_step(state, self.ai_seat, MacroAction(macro))
                    acts = [None, None]
                    acts[self.human_seat] = human_act
                    acts[self.ai_seat] = ps.action
                    macros = [None, None]
                    macros[self.ai_seat] = macro
                    prev = state
                    state, r_a, r_b, done = step(state, acts[0], acts[1])
                    writer.record(prev, acts, (r_a, r_b), state, macros=macros)
                    message = {
                        "type": "tick",
                        "t": prev.t,
                        "score": state.score,
                        "rewards": [r_a, r_b],
                        "done": done,
                        "state": state_to_dict(state),
                    }
                    if self.mode in INTERPRETABLE_MODES:
                        message["ai_macro"] = MACRO_NAMES[macro]
                    try:
                        await websocket.send_json(message)
                    except Exception:
                        status = "disconnected"
                        break
                writer.finish(status)
        finally:
            recv_task.cancel()
            self.phase = "idle"
        if status == "completed":
            self.episodes_completed += 1
            self.iteration += 1
            self.episode_logs.append(path)
        else:
            aborted = path + ".aborted"
            os.replace(path, aborted)
        try:
            await websocket.send_json({"type": "end", "status": status, "score": state.score})
        except Exception:
            pass
        return status

    # -- AI-led optimization -------------------------------------------------------

    def start_optimize(self) -> OptimizeJob:
        if self.mode != "ai-led-mod":
            raise SessionError(403, f"mode {self.mode} does not run AI-led optimization")
        self.require_idle()
        if not self.episode_logs:
            raise SessionError(409, "no completed episodes to learn from")
        self.phase = "optimizing"
        job = OptimizeJob(id=uuid.uuid4().hex[:12])
        self.job = job
        job.push("starting", 0.0)
        return job

    def run_optimize_job(self, job: OptimizeJob):
        """Blocking body, executed off the request path (worker thread)."""
        from ..episode_log import bc_pairs_from_log
        from ..idct import extract_crisp_tree, model_from_crisp_tree
        from ..policy import document_for_tree
        from ..pruning import prune
        from ..training.bc import InsufficientData, behavior_clone
        from ..training.finetune import ai_led_finetune
        from ..training.policies import DenseAgent, IdctAgent

        try:
            pairs = []
            for path in self.episode_logs:
                with open(path) as fh:
                    pairs.extend(bc_pairs_from_log(fh, self.human_seat))
            job.push(f"cloning human model from {len(pairs)} pairs", 0.1)
            net, bc_report = behavior_clone(pairs, seed=self.seed)
            partner = DenseAgent(net)
            agent = IdctAgent(model_from_crisp_tree(self.doc.tree), seed=self.seed)
            cfg = TrainConfig(layout=self.layout.name, horizon=self.layout.horizon,
                              steps_per_update=2048)
            job.push("optimizing against cloned partner", 0.3)
            tuned, report = ai_led_finetune(
                agent, partner, self.layout, cfg,
                budget_steps=self.cfg.optimize_budget_steps,
                budget_seconds=self.cfg.optimize_budget_seconds,
                seed=self.seed,
                progress=lambda s, total: job.push(f"{s}/{total} steps", 0.3 + 0.6 * s / max(total, 1)),
            )
            if report["accepted"]:
                tree = extract_crisp_tree(tuned.model, self.doc.tree.feature_names,
                                          self.doc.tree.macro_names)
                pruned, _ = prune(tree)
                new_doc = PolicyDocument(
                    layout=self.doc.layout, tree=pruned,
                    provenance=self.doc.provenance, parent_hash=self.doc.hash,
                ).with_event("ai-optimized",
                             note=f"bc acc {bc_report['accuracy']:.2f}; "
                                  f"{report['candidate_mean']:.1f} vs {report['original_mean']:.1f}")
                self.doc = new_doc
            job.accepted = bool(report["accepted"])
            job.status = "done"
            job.push("kept candidate" if report["accepted"] else "kept original", 1.0)
        except InsufficientData as exc:
            job.status = "failed"
            job.push(f"insufficient data: {exc}", 1.0)
        except Exception as exc:  # surfaced via status; job must not wedge the session
            job.status = "failed"
            job.push(f"error: {exc}", 1.0)
        finally:
            self.phase = "idle"


class SessionManager:
    def __init__(self, cfg: ServiceConfig, registry: PolicyRegistry):
        self.cfg = cfg
        self.registry = registry
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, mode: str, layout: Layout, human_seat: int, seed: int,
               tutorial: bool = False) -> Session:
        doc, dense = None, None
        if tutorial:
            if mode != "static-blackbox":
                raise SessionError(422, "tutorial sessions use mode static-blackbox")
        elif mode == "fcp":
            dense = self.registry.dense_policy(layout.name)
        else:
            doc = self.registry.tree_document(layout.name)
        sid = uuid.uuid4().hex[:12]
        session = Session(sid, mode, layout, self.cfg, doc, dense, human_seat, seed,
                          tutorial=tutorial)
        with self._lock:
            self.sessions[sid] = session
        return session

    def get(self, sid: str) -> Session:
        try:
            return self.sessions[sid]
        except KeyError:
            raise SessionError(404, f"no session {sid}") from None
