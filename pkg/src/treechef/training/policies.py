"""Trainable policy wrappers: the tree agent and the dense-network agent.

Both expose the MacroPolicy.choose interface for rollouts (a cached numpy
fast path, no autograd) plus a torch `recompute` used by PPO updates. The
rollout-time log-probs and the torch recomputation agree to float noise,
which is what makes the first-epoch ratio check meaningful.
"""

from __future__ import annotations

import io
import json

import numpy as np
import torch

from ..agents import np_log_softmax as _np_log_softmax, restricted_log_probs as _restricted_log_probs
from ..idct import IdctModel, crisp_log_probs, extract_crisp_tree, sparsity_loss
from ..features import FEATURE_NAMES, NUM_FEATURES
from ..planning import MACRO_NAMES, NUM_MACROS
from ..tree import CrispTree


class ValueMLP(torch.nn.Module):
    """Small critic over the feature vector (the tree stays policy-only)."""

    def __init__(self, hidden: int = 64):
        super().__init__()
        self.net = torch.nn.Sequential(
            torch.nn.Linear(NUM_FEATURES, hidden, dtype=torch.float64),
            torch.nn.Tanh(),
            torch.nn.Linear(hidden, hidden, dtype=torch.float64),
            torch.nn.Tanh(),
            torch.nn.Linear(hidden, 1, dtype=torch.float64),
        )

    def forward(self, x):
        return self.net(x).squeeze(-1)


def _mlp_numpy_fn(net: torch.nn.Sequential):
    layers = []
    for mod in net:
        if isinstance(mod, torch.nn.Linear):
            layers.append((mod.weight.detach().numpy().copy(), mod.bias.detach().numpy().copy()))
        elif isinstance(mod, torch.nn.Tanh):
            layers.append(None)

    def fn(x: np.ndarray) -> np.ndarray:
        h = x
        for layer in layers:
            if layer is None:
                h = np.tanh(h)
            else:
                w, b = layer
                h = h @ w.T + b
        return h

    return fn


class IdctAgent:
    """Tree policy plus a dense value head; the policy itself stays a tree."""

    def __init__(self, model: IdctModel, lr: float = 1e-3, reg: float = 1e-4, seed: int = 0):
        self.model = model
        self.reg = reg
        gen = torch.Generator().manual_seed(seed)
        self.value_net = ValueMLP()
        with torch.no_grad():
            for p in self.value_net.parameters():
                if p.dim() > 1:
                    torch.nn.init.xavier_uniform_(p, generator=gen)
                else:
                    p.zero_()
        self.optimizer = torch.optim.Adam(
            list(self.model.parameters()) + list(self.value_net.parameters()), lr=lr
        )
        self._refresh()

    # -- rollout fast path ---------------------------------------------------

    def _refresh(self):
        feats, thresholds, greater, degenerate = self.model.crisp_params()
        self._feats, self._thr, self._gt = feats, thresholds, greater
        self._deg = degenerate
        self._kind = self.model.child_kind
        self._idx = self.model.child_idx
        self._leaf_logp = _np_log_softmax(self.model.leaf_logits.detach().numpy())
        self._value_fn = _mlp_numpy_fn(self.value_net.net)

    def walk_leaf(self, x: np.ndarray) -> int:
        if self.model.num_nodes == 0:
            return 0
        i = 0
        while True:
            if self._deg[i]:
                took = True
            else:
                v = x[self._feats[i]]
                took = v > self._thr[i] if self._gt[i] else v < self._thr[i]
            side = 0 if took else 1
            kind, nxt = self._kind[i, side], self._idx[i, side]
            if kind == -1:
                return int(nxt)
            i = int(nxt)

    def choose(self, state, player, x, mask, rng):
        leaf = self.walk_leaf(x)
        logp = _restricted_log_probs(self._leaf_logp[leaf], mask)
        probs = np.exp(logp)
        macro = int(rng.choice(NUM_MACROS, p=probs / probs.sum()))
        value = float(self._value_fn(x)[0])
        return macro, float(logp[macro]), value

    # -- update path -----------------------------------------------------------

    def recompute(self, X, macros, masks):
        logp, entropy = crisp_log_probs(self.model, X, macros, masks)
        values = self.value_net(torch.as_tensor(np.asarray(X, dtype=np.float64)))
        return logp, entropy, values

    def extra_loss(self):
        return sparsity_loss(self.model, self.reg)

    def state_dict(self):
        return {
            "model": {k: v.clone() for k, v in self.model.state_dict().items()},
            "value": {k: v.clone() for k, v in self.value_net.state_dict().items()},
            "opt": self.optimizer.state_dict(),
        }

    def load_state_dict(self, snap):
        self.model.load_state_dict(snap["model"])
        self.value_net.load_state_dict(snap["value"])
        self.optimizer.load_state_dict(snap["opt"])
        self._refresh()

    def crisp_tree(self) -> CrispTree:
        return extract_crisp_tree(self.model, FEATURE_NAMES, MACRO_NAMES)


class DensePolicy(torch.nn.Module):
    """13 -> 64 -> 64 trunk with macro-logit and scalar value heads."""

    def __init__(self, hidden: int = 64, seed: int = 0):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        self.trunk = torch.nn.Sequential(
            torch.nn.Linear(NUM_FEATURES, hidden, dtype=torch.float64),
            torch.nn.Tanh(),
            torch.nn.Linear(hidden, hidden, dtype=torch.float64),
            torch.nn.Tanh(),
        )
        self.pi = torch.nn.Linear(hidden, NUM_MACROS, dtype=torch.float64)
        self.v = torch.nn.Linear(hidden, 1, dtype=torch.float64)
        with torch.no_grad():
            for p in self.parameters():
                if p.dim() > 1:
                    torch.nn.init.xavier_uniform_(p, generator=gen)
                else:
                    p.zero_()

    def forward(self, x):
        h = self.trunk(x)
        return self.pi(h), self.v(h).squeeze(-1)

    # -- flat binary weight file ------------------------------------------------
    # Format: magic "TCDW1\n", one JSON header line with the parameter
    # names/shapes in order, then the raw little-endian float64 buffers.

    MAGIC = b"TCDW1\n"

    def save_weights(self, path: str):
        names = [n for n, _ in self.named_parameters()]
        shapes = {n: list(p.shape) for n, p in self.named_parameters()}
        with open(path, "wb") as fh:
            fh.write(self.MAGIC)
            fh.write((json.dumps({"order": names, "shapes": shapes}) + "\n").encode())
            for _, p in self.named_parameters():
                fh.write(p.detach().numpy().astype("<f8").tobytes())

    @classmethod
    def load_weights(cls, path: str) -> "DensePolicy":
        with open(path, "rb") as fh:
            magic = fh.read(len(cls.MAGIC))
            if magic != cls.MAGIC:
                raise ValueError(f"{path} is not a dense weight file")
            header = json.loads(fh.readline().decode())
            blob = fh.read()
        model = cls()
        params = dict(model.named_parameters())
        offset = 0
        with torch.no_grad():
            for name in header["order"]:
                shape = header["shapes"][name]
                count = int(np.prod(shape)) if shape else 1
                arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(shape)
                offset += count * 8
                params[name].copy_(torch.as_tensor(arr.copy()))
        return model


class DenseAgent:
    """PPO wrapper around DensePolicy with the same surface as IdctAgent."""

    def __init__(self, net: DensePolicy | None = None, lr: float = 1e-3, seed: int = 0):
        self.net = net if net is not None else DensePolicy(seed=seed)
        self.optimizer = torch.optim.Adam(self.net.parameters(), lr=lr)
        self._refresh()

    def _refresh(self):
        trunk_fn = _mlp_numpy_fn(self.net.trunk)
        pi_w = self.net.pi.weight.detach().numpy().copy()
        pi_b = self.net.pi.bias.detach().numpy().copy()
        v_w = self.net.v.weight.detach().numpy().copy()
        v_b = self.net.v.bias.detach().numpy().copy()

        def fn(x):
            h = trunk_fn(x)
            return h @ pi_w.T + pi_b, float((h @ v_w.T + v_b)[0])

        self._forward = fn

    def choose(self, state, player, x, mask, rng):
        logits, value = self._forward(x)
        logp = _restricted_log_probs(_np_log_softmax(logits), mask)
        probs = np.exp(logp)
        macro = int(rng.choice(NUM_MACROS, p=probs / probs.sum()))
        return macro, float(logp[macro]), value

    def recompute(self, X, macros, masks):
        Xt = torch.as_tensor(np.asarray(X, dtype=np.float64))
        logits, values = self.net(Xt)
        mask_t = torch.as_tensor(np.asarray(masks, dtype=bool))
        logits = logits.masked_fill(~mask_t, float("-inf"))
        log_probs = torch.log_softmax(logits, dim=1)
        macros_t = torch.as_tensor(np.asarray(macros, dtype=np.int64))
        chosen = log_probs.gather(1, macros_t[:, None]).squeeze(1)
        probs = log_probs.exp()
        entropy = -(probs * torch.where(probs > 0, log_probs, torch.zeros_like(log_probs))).sum(dim=1)
        return chosen, entropy, values

    def extra_loss(self):
        return torch.zeros((), dtype=torch.float64)

    def state_dict(self):
        return {
            "net": {k: v.clone() for k, v in self.net.state_dict().items()},
            "opt": self.optimizer.state_dict(),
        }

    def load_state_dict(self, snap):
        self.net.load_state_dict(snap["net"])
        self.optimizer.load_state_dict(snap["opt"])
        self._refresh()
