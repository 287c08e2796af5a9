"""Differentiable control trees: sigmoid decision nodes, sparse categorical
leaves, crispified single-feature splits with straight-through gradients.

The trainable model carries a full weight vector per decision node. The
soft pass mixes every leaf through sigmoid gates; the crisp pass walks one
branch using each node's dominant feature and threshold, while gradients
flow through softmax feature selection and sigmoid gate surrogates.
Parameters are float64 throughout so gradient checks against central
finite differences are meaningful.
"""

from __future__ import annotations

import numpy as np
import torch

from .tree import CrispTree, DecisionNode


class InvalidConfig(ValueError):
    pass


class DegenerateNode(ValueError):
    """Decision node with an all-zero weight vector; routes always-true."""


LEAF = -1  # child kind marker


class IdctModel(torch.nn.Module):
    """Binary tree policy. Topology is explicit (arbitrary shapes are legal
    after editing); init_symmetric builds the complete symmetric form.

    child_kind/child_idx are [N, 2] arrays (column 0 = branch taken when
    the node test passes); kind is LEAF or 0 for an internal node.
    """

    def __init__(
        self,
        child_kind: np.ndarray,
        child_idx: np.ndarray,
        num_leaves: int,
        feature_dim: int,
        action_dim: int,
        alpha: float = 1.0,
    ):
        super().__init__()
        num_nodes = len(child_kind)
        if num_leaves != num_nodes + 1:
            raise InvalidConfig("a binary tree has exactly one more leaf than nodes")
        self.child_kind = np.asarray(child_kind, dtype=np.int64).reshape(num_nodes, 2)
        self.child_idx = np.asarray(child_idx, dtype=np.int64).reshape(num_nodes, 2)
        self.num_nodes = num_nodes
        self.num_leaves = num_leaves
        self.feature_dim = feature_dim
        self.action_dim = action_dim
        self.w = torch.nn.Parameter(torch.zeros(num_nodes, feature_dim, dtype=torch.float64))
        self.b = torch.nn.Parameter(torch.zeros(num_nodes, dtype=torch.float64))
        self.leaf_logits = torch.nn.Parameter(torch.zeros(num_leaves, action_dim, dtype=torch.float64))
        self.register_buffer("alpha", torch.tensor(float(alpha), dtype=torch.float64))

    # -- crispification ------------------------------------------------------

    def crisp_params(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(feature, threshold, greater_is_true, degenerate) per node."""
        w = self.w.detach().numpy()
        b = self.b.detach().numpy()
        feats = np.abs(w).argmax(axis=1)
        wj = w[np.arange(self.num_nodes), feats]
        degenerate = wj == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            thresholds = np.where(degenerate, -1.0, b / np.where(degenerate, 1.0, wj))
        greater = np.where(degenerate, True, wj > 0.0)
        return feats, thresholds, greater, degenerate

    def selection(self) -> torch.Tensor:
        """Straight-through feature selector per node: hard one-hot on
        argmax|w| forward, softmax(|w|) gradient."""
        mag = self.w.abs()
        soft = torch.softmax(mag, dim=1)
        hard = torch.nn.functional.one_hot(mag.argmax(dim=1), self.feature_dim).to(soft.dtype)
        return hard + soft - soft.detach()


def init_symmetric(
    num_leaves: int, feature_dim: int, action_dim: int, seed: int = 0, alpha: float = 1.0
) -> IdctModel:
    """Complete symmetric tree: weights ~U(-0.1, 0.1), biases 0.5, uniform leaves."""
    if num_leaves < 2 or num_leaves & (num_leaves - 1):
        raise InvalidConfig(f"num_leaves must be a power of two >= 2, got {num_leaves}")
    n = num_leaves - 1
    child_kind = np.zeros((n, 2), dtype=np.int64)
    child_idx = np.zeros((n, 2), dtype=np.int64)
    for i in range(n):
        for side, child in enumerate((2 * i + 1, 2 * i + 2)):
            if child < n:
                child_kind[i, side] = 0
                child_idx[i, side] = child
            else:
                child_kind[i, side] = LEAF
                child_idx[i, side] = child - n
    model = IdctModel(child_kind, child_idx, num_leaves, feature_dim, action_dim, alpha)
    gen = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        model.w.uniform_(-0.1, 0.1, generator=gen)
        model.b.fill_(0.5)
    return model


def crispify_node(w_i, b_i) -> tuple[int, float, bool]:
    """Recast one soft node as a single-feature threshold test.

    j* = argmax |w| (ties to the lowest index), threshold = b / w_j*,
    sense greater-is-true iff w_j* > 0.
    """
    w = np.asarray(w_i, dtype=np.float64)
    b = float(b_i)
    j = int(np.abs(w).argmax())
    if w[j] == 0.0:
        raise DegenerateNode("all-zero weight vector")
    return j, b / w[j], bool(w[j] > 0.0)


def soft_forward(model: IdctModel, x) -> torch.Tensor:
    """Mixture-of-leaves distribution: every gate soft, differentiable
    everywhere. Accepts [D] or [B, D]; returns matching shape over actions."""
    single = np.ndim(x) == 1
    X = torch.as_tensor(np.atleast_2d(np.asarray(x, dtype=np.float64)))
    gates = torch.sigmoid(model.alpha * (X @ model.w.T - model.b))  # [B, N]
    B = X.shape[0]
    leaf_probs = torch.zeros(B, model.num_leaves, dtype=torch.float64)
    if model.num_nodes == 0:
        leaf_probs = torch.ones(B, 1, dtype=torch.float64)
    else:
        reach = [None] * model.num_nodes
        reach[0] = torch.ones(B, dtype=torch.float64)
        for i in range(model.num_nodes):
            p = reach[i]
            for side, branch_p in ((0, gates[:, i]), (1, 1.0 - gates[:, i])):
                mass = p * branch_p
                kind, idx = model.child_kind[i, side], model.child_idx[i, side]
                if kind == LEAF:
                    leaf_probs[:, idx] = leaf_probs[:, idx] + mass
                else:
                    reach[idx] = mass if reach[idx] is None else reach[idx] + mass
    out = leaf_probs @ torch.softmax(model.leaf_logits, dim=1)
    return out[0] if single else out


def crisp_decisions(model: IdctModel, X: np.ndarray) -> np.ndarray:
    """Hard node outcomes [B, N] using crispified thresholds; identical
    comparisons to CrispTree.eval so the two forms agree bit-for-bit."""
    feats, thresholds, greater, degenerate = model.crisp_params()
    if model.num_nodes == 0:
        return np.zeros((len(X), 0), dtype=bool)
    v = X[:, feats]
    taken = np.where(greater, v > thresholds, v < thresholds)
    taken[:, degenerate] = True
    return taken


def crisp_leaf_indices(model: IdctModel, X: np.ndarray) -> np.ndarray:
    """Leaf index per row, walking one branch with crisp node outcomes."""
    taken = crisp_decisions(model, X)
    B = len(X)
    out = np.empty(B, dtype=np.int64)
    if model.num_nodes == 0:
        out[:] = 0
        return out
    for row in range(B):
        i, kind = 0, 0
        while kind != LEAF:
            side = 0 if taken[row, i] else 1
            kind = model.child_kind[i, side]
            nxt = model.child_idx[i, side]
            i = nxt
        out[row] = i
    return out


def crisp_forward(
    model: IdctModel, x, rng: np.random.Generator, mask: np.ndarray | None = None
) -> tuple[int, int, float]:
    """One crisp pass: walk a single branch, sample a macro from the leaf.

    With a mask, sampling renormalizes over applicable macros and the
    log-prob is over that restricted distribution.
    """
    X = np.atleast_2d(np.asarray(x, dtype=np.float64))
    leaf = int(crisp_leaf_indices(model, X)[0])
    logits = model.leaf_logits.detach().numpy()[leaf]
    logp_all = logits - _logsumexp(logits)
    if mask is not None:
        restricted = np.where(mask, logp_all, -np.inf)
        logp_all = restricted - _logsumexp(restricted)
    probs = np.exp(logp_all)
    macro = int(rng.choice(len(probs), p=probs / probs.sum()))
    return leaf, macro, float(logp_all[macro])


def _logsumexp(v: np.ndarray) -> float:
    m = np.max(v)
    if not np.isfinite(m):
        return m
    return m + np.log(np.exp(v - m).sum())


def _crisp_reach(model: IdctModel, taken: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(reach [B, N] bool, leaf_ids [B]) for precomputed node outcomes.
    Pure numpy: routing is hard and carries no gradient."""
    B = len(taken)
    reach = np.zeros((B, model.num_nodes), dtype=bool)
    leaf_ids = np.zeros(B, dtype=np.int64)
    if model.num_nodes == 0:
        return reach, leaf_ids
    reach[:, 0] = True
    for i in range(model.num_nodes):
        at = reach[:, i]
        if not at.any():
            continue
        for side, went in ((0, at & taken[:, i]), (1, at & ~taken[:, i])):
            kind, idx = model.child_kind[i, side], model.child_idx[i, side]
            if kind == LEAF:
                leaf_ids[went] = idx
            else:
                reach[went, idx] = True
    return reach, leaf_ids


def crisp_log_probs(
    model: IdctModel,
    X: np.ndarray,
    macros: np.ndarray,
    masks: np.ndarray | None = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Batched log pi(macro | x) under crisp routing with straight-through
    gradients, plus the entropy of each (restricted) leaf distribution.

    Forward values equal the sampled-time log-probs exactly (the hard
    gates on the taken path are all 1); backward sees sigmoid gates of the
    selected-feature surrogate along the taken path and softmax feature
    selection at every node on it.
    """
    X = np.asarray(X, dtype=np.float64)
    Xt = torch.as_tensor(X)
    B = Xt.shape[0]
    macros_t = torch.as_tensor(np.asarray(macros, dtype=np.int64))
    if model.num_nodes > 0:
        taken_np = crisp_decisions(model, X)
        reach_np, leaf_np = _crisp_reach(model, taken_np)
        taken = torch.as_tensor(taken_np)
        sel = model.selection()  # [N, D] straight-through one-hot
        u = Xt @ (sel * model.w).T - model.b  # forward: w_j* x_j* - b
        y = torch.sigmoid(model.alpha * u)  # soft gate surrogate
        gate_true = taken.to(torch.float64) + y - y.detach()  # forward 1/0
        # Gate actually traversed; forward value 1 everywhere, so the log
        # is 0 and only the straight-through gradient survives.
        g_taken = torch.where(taken, gate_true, 1.0 - gate_true)
        path_logp = (torch.as_tensor(reach_np, dtype=torch.float64) * torch.log(g_taken)).sum(dim=1)
        leaf_ids = torch.as_tensor(leaf_np)
    else:
        path_logp = torch.zeros(B, dtype=torch.float64)
        leaf_ids = torch.zeros(B, dtype=torch.int64)
    logits = model.leaf_logits[leaf_ids]  # [B, A]
    if masks is not None:
        mask_t = torch.as_tensor(np.asarray(masks, dtype=bool))
        logits = logits.masked_fill(~mask_t, float("-inf"))
    log_probs = torch.log_softmax(logits, dim=1)
    chosen = log_probs.gather(1, macros_t[:, None]).squeeze(1)
    probs = log_probs.exp()
    entropy = -(probs * torch.where(probs > 0, log_probs, torch.zeros_like(log_probs))).sum(dim=1)
    return path_logp + chosen, entropy


def sparsity_loss(model: IdctModel, lam: float) -> torch.Tensor:
    """L1 over raw leaf parameters, scaled by lam."""
    if lam < 0:
        raise InvalidConfig("lam must be >= 0")
    return lam * model.leaf_logits.abs().sum()


def gradients(model: IdctModel) -> dict[str, np.ndarray]:
    """Current parameter gradients as numpy (zeros when unset)."""
    out = {}
    for name, p in (("w", model.w), ("b", model.b), ("leaf_logits", model.leaf_logits)):
        out[name] = np.zeros(p.shape) if p.grad is None else p.grad.detach().numpy().copy()
    return out


def extract_crisp_tree(
    model: IdctModel, feature_names, macro_names
) -> CrispTree:
    """Crispify every node and softmax every leaf. Degenerate (all-zero
    weight) nodes become always-true tests on feature 0."""
    feats, thresholds, greater, degenerate = model.crisp_params()
    feats = np.where(degenerate, 0, feats)
    nodes = {}
    for i in range(model.num_nodes):
        children = []
        for side in (0, 1):
            kind, idx = model.child_kind[i, side], model.child_idx[i, side]
            children.append(f"l{idx}" if kind == LEAF else f"n{idx}")
        nodes[f"n{i}"] = DecisionNode(
            feature=int(feats[i]),
            threshold=float(thresholds[i]),
            greater_is_true=bool(greater[i]),
            left=children[0],
            right=children[1],
        )
    probs = torch.softmax(model.leaf_logits, dim=1).detach().numpy()
    leaves = {f"l{i}": probs[i] for i in range(model.num_leaves)}
    root = "n0" if model.num_nodes else "l0"
    return CrispTree(nodes=nodes, leaves=leaves, root=root,
                     feature_names=tuple(feature_names), macro_names=tuple(macro_names))


def model_from_crisp_tree(tree: CrispTree, scale: float = 4.0) -> IdctModel:
    """Rebuild a trainable model whose crispification reproduces `tree`
    exactly: one-hot weights of magnitude `scale` (a power of two, so
    threshold = b/w reproduces bit-for-bit), matching thresholds,
    leaf logits = log-probabilities. Node index 0 is the root (the model
    walkers start there), so ids are renumbered in BFS order."""
    node_ids: list[str] = []
    leaf_ids: list[str] = []
    queue = [tree.root]
    while queue:
        nid = queue.pop(0)
        if nid in tree.leaves:
            leaf_ids.append(nid)
        else:
            node_ids.append(nid)
            queue.append(tree.nodes[nid].left)
            queue.append(tree.nodes[nid].right)
    n_index = {nid: i for i, nid in enumerate(node_ids)}
    l_index = {lid: i for i, lid in enumerate(leaf_ids)}
    n = len(node_ids)
    child_kind = np.zeros((n, 2), dtype=np.int64)
    child_idx = np.zeros((n, 2), dtype=np.int64)
    for nid in node_ids:
        node = tree.nodes[nid]
        for side, ref in ((0, node.left), (1, node.right)):
            if ref in tree.leaves:
                child_kind[n_index[nid], side] = LEAF
                child_idx[n_index[nid], side] = l_index[ref]
            else:
                child_kind[n_index[nid], side] = 0
                child_idx[n_index[nid], side] = n_index[ref]
    model = IdctModel(child_kind, child_idx, len(leaf_ids),
                      len(tree.feature_names), len(tree.macro_names))
    with torch.no_grad():
        for nid in node_ids:
            i = n_index[nid]
            node = tree.nodes[nid]
            s = scale if node.greater_is_true else -scale
            model.w[i, node.feature] = s
            model.b[i] = node.threshold * s
        for lid in leaf_ids:
            p = np.clip(tree.leaves[lid], 1e-9, None)
            model.leaf_logits[l_index[lid]] = torch.as_tensor(np.log(p / p.sum()))
    return model
