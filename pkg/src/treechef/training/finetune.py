"""Budgeted online fine-tuning with a keep-best gate: the optimized policy
replaces the incumbent only when it evaluates at least as well against
the same partner on the same seeds."""

from __future__ import annotations

import copy
import time

import numpy as np

from ..env.layout import Layout
from .buffer import compute_gae
from .config import TrainConfig
from .loops import AI_SEAT
from .policies import IdctAgent
from .ppo import NonFiniteLoss, collect_rollouts, ppo_update
from .rollout import evaluate


def ai_led_finetune(
    agent: IdctAgent,
    partner,
    layout: Layout,
    cfg: TrainConfig,
    budget_steps: int | None = None,
    budget_seconds: float | None = None,
    seed: int = 0,
    progress=None,
) -> tuple[IdctAgent, dict]:
    """PPO-tune `agent` against a frozen partner within the budget, then
    keep whichever of {original, candidate} evaluates higher.

    budget_steps=0 (or an elapsed wall clock) returns the original as-is.
    """
    if budget_steps is None:
        budget_steps = cfg.finetune_budget_steps
    candidate = copy.deepcopy(agent)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 41]))
    steps = 0
    update_index = 0
    state = None
    started = time.monotonic()
    chunk = min(cfg.steps_per_update, max(budget_steps, 1))
    while steps < budget_steps:
        if budget_seconds is not None and time.monotonic() - started >= budget_seconds:
            break
        seats = {AI_SEAT: candidate, 1 - AI_SEAT: partner}
        buf0, buf1, state = collect_rollouts(layout, seats[0], seats[1], chunk, rng,
                                             horizon=cfg.horizon, start_state=state)
        buf = buf1 if AI_SEAT == 1 else buf0
        compute_gae(buf, cfg.gamma, cfg.gae_lambda)
        try:
            ppo_update(candidate, buf, cfg, update_index)
        except NonFiniteLoss:
            break  # candidate keeps its last finite parameters
        steps += chunk
        update_index += 1
        if progress is not None:
            progress(steps, budget_steps)

    if steps == 0:
        return agent, {"accepted": False, "tuned_steps": 0,
                       "original_mean": None, "candidate_mean": None}
    seats_orig = {AI_SEAT: agent, 1 - AI_SEAT: partner}
    seats_cand = {AI_SEAT: candidate, 1 - AI_SEAT: partner}
    original_eval = evaluate(seats_orig[0], seats_orig[1], layout,
                             cfg.finetune_eval_episodes, seed=seed + 7000, horizon=cfg.horizon)
    candidate_eval = evaluate(seats_cand[0], seats_cand[1], layout,
                              cfg.finetune_eval_episodes, seed=seed + 7000, horizon=cfg.horizon)
    accepted = candidate_eval["mean"] > original_eval["mean"]
    report = {
        "accepted": accepted,
        "tuned_steps": steps,
        "original_mean": original_eval["mean"],
        "candidate_mean": candidate_eval["mean"],
    }
    return (candidate if accepted else agent), report
