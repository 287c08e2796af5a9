"""Behavioral cloning of the human seat from episode logs."""

from __future__ import annotations

import numpy as np
import torch

from .policies import DensePolicy


class InsufficientData(ValueError):
    pass


MIN_PAIRS = 20


def behavior_clone(
    pairs: list[tuple[np.ndarray, int]],
    epochs: int = 60,
    lr: float = 1e-3,
    holdout: float = 0.2,
    seed: int = 0,
) -> tuple[DensePolicy, dict]:
    """Cross-entropy fit of a dense policy to (features, macro) pairs.

    Returns the trained policy and a report with held-out top-1 accuracy.
    """
    if len(pairs) < MIN_PAIRS:
        raise InsufficientData(f"need >= {MIN_PAIRS} pairs, got {len(pairs)}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(pairs))
    X = np.stack([pairs[i][0] for i in order]).astype(np.float64)
    y = np.array([pairs[i][1] for i in order], dtype=np.int64)
    n_hold = max(1, int(len(pairs) * holdout))
    X_train, y_train = X[:-n_hold], y[:-n_hold]
    X_hold, y_hold = X[-n_hold:], y[-n_hold:]

    net = DensePolicy(seed=seed)
    opt = torch.optim.Adam(net.parameters(), lr=lr)
    Xt = torch.as_tensor(X_train)
    yt = torch.as_tensor(y_train)
    gen = torch.Generator().manual_seed(seed)
    batch = 64
    for _ in range(epochs):
        perm = torch.randperm(len(Xt), generator=gen)
        for lo in range(0, len(Xt), batch):
            idx = perm[lo : lo + batch]
            logits, _ = net(Xt[idx])
            loss = torch.nn.functional.cross_entropy(logits, yt[idx])
            opt.zero_grad()
            loss.backward()
            opt.step()
    with torch.no_grad():
        logits, _ = net(torch.as_tensor(X_hold))
        pred = logits.argmax(dim=1).numpy()
    accuracy = float((pred == y_hold).mean())
    report = {"pairs": len(pairs), "holdout": int(n_hold), "accuracy": accuracy}
    return net, report
