"""End-to-end training drivers: tree-vs-partner PPO and fictitious co-play."""

from __future__ import annotations

import copy
import csv
import os
from dataclasses import dataclass, field

import numpy as np
import torch

from ..env.layout import Layout, builtin_layout
from ..idct import init_symmetric
from ..features import FEATURE_NAMES, NUM_FEATURES
from ..planning import MACRO_NAMES, NUM_MACROS
from ..policy import document_for_tree, serialize
from ..pruning import prune
from .buffer import compute_gae
from .config import TrainConfig
from .policies import DenseAgent, DensePolicy, IdctAgent
from .ppo import collect_rollouts, ppo_update
from .rollout import evaluate

# Seat convention across training and the live service: the human (or the
# synthetic-human partner policy) sits in seat 0, the AI in seat 1.
AI_SEAT = 1


def resolve_layout(name_or_path: str) -> Layout:
    from ..env.layout import load_layout

    if os.path.exists(name_or_path):
        with open(name_or_path) as fh:
            return load_layout(fh.read())
    return builtin_layout(name_or_path)


@dataclass
class Curve:
    steps: list[int] = field(default_factory=list)
    mean: list[float] = field(default_factory=list)
    std: list[float] = field(default_factory=list)

    def add(self, steps: int, mean: float, std: float):
        self.steps.append(steps)
        self.mean.append(mean)
        self.std.append(std)

    def smoothed(self, window: int = 3) -> list[float]:
        out = []
        for i in range(len(self.mean)):
            lo = max(0, i - window + 1)
            out.append(float(np.mean(self.mean[lo : i + 1])))
        return out

    def save_csv(self, path: str):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["env_steps", "eval_mean", "eval_std"])
            for row in zip(self.steps, self.mean, self.std):
                writer.writerow(row)


@dataclass
class TrainResult:
    agent: IdctAgent
    partner: DenseAgent
    curve: Curve
    pruned_doc: object
    env_steps: int


def train_agent_agent(
    cfg: TrainConfig,
    out_dir: str | None = None,
    stop_at_reward: float | None = None,
    progress=None,
) -> TrainResult:
    """Two separate agents trained jointly: the tree policy in the AI seat,
    a dense policy standing in for the human. Each keeps its own buffer
    and optimizer. Checkpoints and the eval curve land in out_dir."""
    layout = resolve_layout(cfg.layout)
    tree_agent = IdctAgent(
        init_symmetric(cfg.num_leaves, NUM_FEATURES, NUM_MACROS, seed=cfg.seed),
        lr=cfg.lr, reg=cfg.reg, seed=cfg.seed + 1,
    )
    partner = DenseAgent(lr=cfg.lr, seed=cfg.seed + 2)
    seats = {AI_SEAT: tree_agent, 1 - AI_SEAT: partner}
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 77]))
    curve = Curve()
    eval_every = max(cfg.total_steps // max(cfg.checkpoints, 1), cfg.steps_per_update)

    def run_eval(steps_done: int):
        result = evaluate(seats[0], seats[1], layout, cfg.eval_episodes,
                          seed=cfg.seed + 1000, horizon=cfg.horizon)
        curve.add(steps_done, result["mean"], result["std"])
        if progress is not None:
            progress(steps_done, result["mean"])
        if out_dir:
            _save_checkpoints(out_dir, tree_agent, partner, layout, steps_done)
        return result["mean"]

    steps_done = 0
    update_index = 0
    state = None
    next_eval = eval_every
    run_eval(0)
    while steps_done < cfg.total_steps:
        buf0, buf1, state = collect_rollouts(
            layout, seats[0], seats[1], cfg.steps_per_update, rng,
            horizon=cfg.horizon, start_state=state,
        )
        for seat, buf in ((0, buf0), (1, buf1)):
            compute_gae(buf, cfg.gamma, cfg.gae_lambda)
            ppo_update(seats[seat], buf, cfg, update_index)
        steps_done += cfg.steps_per_update
        update_index += 1
        if steps_done >= next_eval or steps_done >= cfg.total_steps:
            mean = run_eval(steps_done)
            next_eval += eval_every
            if stop_at_reward is not None and mean >= stop_at_reward:
                break

    tree = tree_agent.crisp_tree()
    pruned, report = prune(tree)
    doc = document_for_tree(pruned, layout.name, event="trained").with_event(
        "pruned", note=f"{report.leaves_before}->{report.leaves_after} leaves"
    )
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        curve.save_csv(os.path.join(out_dir, "curve.csv"))
        with open(os.path.join(out_dir, "policy.json"), "wb") as fh:
            fh.write(serialize(doc))
        partner.net.save_weights(os.path.join(out_dir, "partner.weights"))
    return TrainResult(tree_agent, partner, curve, doc, steps_done)


def _save_checkpoints(out_dir, tree_agent, partner, layout, steps_done):
    os.makedirs(out_dir, exist_ok=True)
    doc = document_for_tree(tree_agent.crisp_tree(), layout.name, event=f"checkpoint@{steps_done}")
    with open(os.path.join(out_dir, f"checkpoint_{steps_done:08d}.policy.json"), "wb") as fh:
        fh.write(serialize(doc))


# ---------------------------------------------------------------------------
# Fictitious co-play
# ---------------------------------------------------------------------------


@dataclass
class FcpResult:
    agent: DenseAgent
    partners: list[DensePolicy]
    curve: Curve


class _SelfPlayPolicy:
    """One net playing both seats; both seats' transitions feed one buffer."""

    def __init__(self, agent: DenseAgent):
        self.agent = agent

    def choose(self, state, player, x, mask, rng):
        return self.agent.choose(state, player, x, mask, rng)


def _merge_buffers(a, b):
    import numpy as _np

    from .buffer import RolloutBuffer

    return RolloutBuffer(
        features=_np.concatenate([a.features, b.features]),
        masks=_np.concatenate([a.masks, b.masks]),
        macros=_np.concatenate([a.macros, b.macros]),
        log_probs=_np.concatenate([a.log_probs, b.log_probs]),
        rewards=_np.concatenate([a.rewards, b.rewards]),
        values=_np.concatenate([a.values, b.values]),
        dones=_np.concatenate([a.dones, b.dones]),
        bootstrap_value=0.0,
    )


def train_fcp(cfg: TrainConfig, out_dir: str | None = None, progress=None) -> FcpResult:
    """Population of self-play members, three checkpoints each (initial,
    mid-performing, best), then one dense policy trained against partners
    sampled uniformly from that set."""
    layout = resolve_layout(cfg.layout)
    partner_set: list[DensePolicy] = []
    for member in range(cfg.population):
        agent = DenseAgent(lr=cfg.lr, seed=cfg.seed + 10 + member)
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 500 + member]))
        snaps: list[tuple[float, DensePolicy]] = []

        def snap() -> float:
            policy = copy.deepcopy(agent.net)
            score = evaluate(agent, agent, layout, max(cfg.eval_episodes // 5, 5),
                             seed=cfg.seed + 2000 + member, horizon=cfg.horizon)["mean"]
            snaps.append((score, policy))
            return score

        snap()  # initial
        steps, state = 0, None
        updates = max(cfg.population_steps // cfg.steps_per_update, 1)
        sp = _SelfPlayPolicy(agent)
        for u in range(updates):
            buf0, buf1, state = collect_rollouts(layout, sp, sp, cfg.steps_per_update,
                                                 rng, horizon=cfg.horizon, start_state=state)
            for buf in (buf0, buf1):
                compute_gae(buf, cfg.gamma, cfg.gae_lambda)
            merged = _merge_buffers(buf0, buf1)
            ppo_update(agent, merged, cfg, update_index=u)
            steps += cfg.steps_per_update
            if u == updates // 2 or u == updates - 1:
                snap()
        initial = snaps[0]
        best = max(snaps[1:], key=lambda s: s[0]) if len(snaps) > 1 else initial
        midpoint = (initial[0] + best[0]) / 2
        middle = min(snaps, key=lambda s: abs(s[0] - midpoint))
        partner_set.extend([initial[1], middle[1], best[1]])
        if progress is not None:
            progress(f"member {member}", best[0])

    learner = DenseAgent(lr=cfg.lr, seed=cfg.seed + 99)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 901]))
    curve = Curve()
    total = cfg.total_steps
    steps_done = 0
    update_index = 0
    eval_every = max(total // max(cfg.checkpoints, 1), cfg.horizon)
    next_eval = 0
    while steps_done < total:
        partner_net = partner_set[int(rng.integers(len(partner_set)))]
        partner = DenseAgent(copy.deepcopy(partner_net))
        buf0, buf1, _ = collect_rollouts(layout, partner, learner, cfg.horizon, rng,
                                         horizon=cfg.horizon)
        compute_gae(buf1, cfg.gamma, cfg.gae_lambda)
        ppo_update(learner, buf1, cfg, update_index)
        steps_done += cfg.horizon
        update_index += 1
        if steps_done >= next_eval:
            scores = [
                evaluate(DenseAgent(p), learner, layout, 2, seed=cfg.seed + 3000,
                         horizon=cfg.horizon)["mean"]
                for p in partner_set
            ]
            curve.add(steps_done, float(np.mean(scores)), float(np.std(scores)))
            if progress is not None:
                progress(f"fcp@{steps_done}", curve.mean[-1])
            next_eval += eval_every
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        learner.net.save_weights(os.path.join(out_dir, "fcp.weights"))
        curve.save_csv(os.path.join(out_dir, "fcp_curve.csv"))
    return FcpResult(learner, partner_set, curve)
