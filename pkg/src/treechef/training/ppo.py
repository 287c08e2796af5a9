"""Decentralized PPO: simultaneous rollout collection into per-agent
buffers and clipped-surrogate updates with the tree sparsity term."""

from __future__ import annotations

import numpy as np
import torch

from ..env import reset, step
from ..env.layout import Layout
from ..features import featurize
from ..planning import MacroAction, plan_step
from .buffer import RolloutBuffer, compute_gae
from .config import TrainConfig
from .rollout import applicable_mask


class NonFiniteLoss(RuntimeError):
    pass


def collect_rollouts(
    layout: Layout,
    policy_a,
    policy_b,
    n_steps: int,
    rng: np.random.Generator,
    horizon: int | None = None,
    start_state=None,
):
    """Fill one buffer per agent over `n_steps` simultaneous ticks.

    Episodes roll over internally; a final partial episode bootstraps from
    the agent's value estimate. Returns (buffer_a, buffer_b, end_state) so
    callers can continue the same episode in the next collection round.
    """
    rng_a, rng_b = rng.spawn(2)
    policies = (policy_a, policy_b)
    rngs = (rng_a, rng_b)
    buffers = (RolloutBuffer.empty(n_steps), RolloutBuffer.empty(n_steps))
    state = start_state if start_state is not None and not start_state.done else reset(layout, horizon)
    for t in range(n_steps):
        xs, masks, macros, logps, values, acts = [], [], [], [], [], []
        for i in (0, 1):
            x = featurize(state, i)
            mask = applicable_mask(state, i)
            macro, logp, value = policies[i].choose(state, i, x, mask, rngs[i])
            ps = plan_step(state, i, MacroAction(macro))
            xs.append(x)
            masks.append(mask)
            macros.append(macro)
            logps.append(logp)
            values.append(value)
            acts.append(int(ps.action))
        state, r_a, r_b, done = step(state, acts[0], acts[1])
        for i, r in ((0, r_a), (1, r_b)):
            buffers[i].set_row(t, xs[i], masks[i], macros[i], logps[i], r, values[i], done)
        if done:
            state = reset(layout, horizon)
    if not state.done and not buffers[0].dones[-1]:
        for i in (0, 1):
            x = featurize(state, i)
            mask = applicable_mask(state, i)
            _, _, tail_value = policies[i].choose(state, i, x, mask, np.random.default_rng(0))
            buffers[i].bootstrap_value = tail_value
    return buffers[0], buffers[1], state


def ppo_update(agent, buffer: RolloutBuffer, cfg: TrainConfig, update_index: int = 0) -> dict:
    """K epochs of clipped-surrogate minibatch ascent on one buffer.

    Loss = policy surrogate + value_coef * value MSE - entropy_coef * H
    + the agent's extra term (L1 leaf sparsity for tree agents). A
    non-finite loss aborts the whole update and restores the snapshot.
    """
    if buffer.advantages is None:
        compute_gae(buffer, cfg.gamma, cfg.gae_lambda)
    n = len(buffer)
    adv = buffer.advantages
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    adv_t = torch.as_tensor(adv)
    old_logp = torch.as_tensor(buffer.log_probs)
    returns = torch.as_tensor(buffer.returns)
    macros = buffer.macros
    X, masks = buffer.features, buffer.masks

    with torch.no_grad():
        logp_now, _, _ = agent.recompute(X, macros, masks)
        ratio_dev = float((logp_now - old_logp).exp().sub(1.0).abs().max())

    snapshot = agent.state_dict()
    gen = torch.Generator().manual_seed((update_index + 1) * 9973 + cfg.seed)
    stats = {"ratio_initial_max_dev": ratio_dev, "policy_loss": 0.0,
             "value_loss": 0.0, "entropy": 0.0, "batches": 0}
    for _ in range(cfg.epochs):
        order = torch.randperm(n, generator=gen).numpy()
        for lo in range(0, n, cfg.minibatch):
            idx = order[lo : lo + cfg.minibatch]
            logp, entropy, values = agent.recompute(X[idx], macros[idx], masks[idx])
            ratio = (logp - old_logp[idx]).exp()
            a = adv_t[idx]
            surrogate = torch.minimum(
                ratio * a, torch.clamp(ratio, 1 - cfg.clip_eps, 1 + cfg.clip_eps) * a
            )
            policy_loss = -surrogate.mean()
            value_loss = ((values - returns[idx]) ** 2).mean()
            ent = entropy.mean()
            loss = (
                policy_loss
                + cfg.value_coef * value_loss
                - cfg.entropy_coef * ent
                + agent.extra_loss()
            )
            if not torch.isfinite(loss):
                agent.load_state_dict(snapshot)
                raise NonFiniteLoss(f"loss {float(loss.detach())} at update {update_index}")
            agent.optimizer.zero_grad()
            loss.backward()
            agent.optimizer.step()
            stats["policy_loss"] += float(policy_loss.detach())
            stats["value_loss"] += float(value_loss.detach())
            stats["entropy"] += float(ent.detach())
            stats["batches"] += 1
    for key in ("policy_loss", "value_loss", "entropy"):
        stats[key] /= max(stats["batches"], 1)
    agent._refresh()
    return stats
