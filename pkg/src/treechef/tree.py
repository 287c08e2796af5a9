"""Crisp decision trees: the pruned, human-readable policy form.

Node ids are strings: "n<k>" for decision nodes, "l<k>" for leaves. A
decision node tests one feature against a threshold; `sense` is "gt"
(test passes when x[feature] > threshold) or "lt" (passes when
x[feature] < threshold). The `left` child is taken when the test passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class DecisionNode:
    feature: int
    threshold: float
    greater_is_true: bool
    left: str
    right: str

    @property
    def sense(self) -> str:
        return "gt" if self.greater_is_true else "lt"

    def test(self, x) -> bool:
        v = x[self.feature]
        return v > self.threshold if self.greater_is_true else v < self.threshold


@dataclass
class CrispTree:
    nodes: dict[str, DecisionNode]
    leaves: dict[str, np.ndarray]
    root: str
    feature_names: tuple[str, ...]
    macro_names: tuple[str, ...]

    def __post_init__(self):
        self.leaves = {k: np.asarray(v, dtype=np.float64) for k, v in self.leaves.items()}

    # -- structure -----------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    def depth(self) -> int:
        """Decision nodes along the longest root-leaf path."""

        def walk(node_id: str) -> int:
            if node_id in self.leaves:
                return 0
            n = self.nodes[node_id]
            return 1 + max(walk(n.left), walk(n.right))

        return walk(self.root)

    def leaf_depth(self, leaf_id: str) -> int:
        """Decision nodes above one leaf."""

        def walk(node_id: str, d: int) -> int | None:
            if node_id == leaf_id:
                return d
            if node_id in self.leaves:
                return None
            n = self.nodes[node_id]
            return walk(n.left, d + 1) or walk(n.right, d + 1)

        found = walk(self.root, 0)
        if found is None:
            raise TreeError(f"unknown leaf {leaf_id}")
        return found

    def parent_of(self, child_id: str) -> tuple[str, str] | None:
        """(parent_id, side) or None for the root."""
        for nid, n in self.nodes.items():
            if n.left == child_id:
                return nid, "left"
            if n.right == child_id:
                return nid, "right"
        return None

    def validate(self) -> list[str]:
        """Structural violations; empty list when the tree is well-formed."""
        problems = []
        seen: set[str] = set()

        def walk(node_id: str):
            if node_id in seen:
                problems.append(f"{node_id} referenced more than once")
                return
            seen.add(node_id)
            if node_id in self.leaves:
                probs = self.leaves[node_id]
                if probs.shape != (len(self.macro_names),):
                    problems.append(f"{node_id} has {probs.shape} probs, want {len(self.macro_names)}")
                    return
                if np.any(probs < 0):
                    problems.append(f"{node_id} has negative probabilities")
                if abs(float(probs.sum()) - 1.0) > 1e-9:
                    problems.append(f"{node_id} probabilities sum to {probs.sum():.12f}")
                return
            if node_id not in self.nodes:
                problems.append(f"dangling reference {node_id}")
                return
            n = self.nodes[node_id]
            if not (0 <= n.feature < len(self.feature_names)):
                problems.append(f"{node_id} splits on unknown feature {n.feature}")
            if not np.isfinite(n.threshold):
                problems.append(f"{node_id} has non-finite threshold")
            walk(n.left)
            walk(n.right)

        walk(self.root)
        for nid in list(self.nodes) + list(self.leaves):
            if nid not in seen:
                problems.append(f"{nid} unreachable from root")
        return problems

    # -- evaluation ----------------------------------------------------------

    def eval_leaf(self, x) -> str:
        node_id = self.root
        while node_id in self.nodes:
            n = self.nodes[node_id]
            node_id = n.left if n.test(x) else n.right
        return node_id

    def action_probs(self, x) -> np.ndarray:
        return self.leaves[self.eval_leaf(x)]

    def eval_leaf_batch(self, X: np.ndarray) -> np.ndarray:
        """Vectorized leaf assignment: X is [N, D]; returns leaf-id indices
        into sorted(self.leaves)."""
        leaf_order = {lid: i for i, lid in enumerate(sorted(self.leaves))}
        out = np.empty(len(X), dtype=np.int64)

        def walk(node_id: str, mask: np.ndarray):
            if not mask.any():
                return
            if node_id in self.leaves:
                out[mask] = leaf_order[node_id]
                return
            n = self.nodes[node_id]
            v = X[:, n.feature]
            t = (v > n.threshold) if n.greater_is_true else (v < n.threshold)
            walk(n.left, mask & t)
            walk(n.right, mask & ~t)

        walk(self.root, np.ones(len(X), dtype=bool))
        return out

    # -- serialization -------------------------------------------------------

    def to_payload(self) -> dict:
        return {
            "root": self.root,
            "nodes": [
                {
                    "id": nid,
                    "feature": n.feature,
                    "threshold": n.threshold,
                    "sense": n.sense,
                    "left": n.left,
                    "right": n.right,
                }
                for nid, n in sorted(self.nodes.items())
            ],
            "leaves": [
                {
                    "id": lid,
                    "probs": {name: float(p) for name, p in zip(self.macro_names, probs)},
                }
                for lid, probs in sorted(self.leaves.items())
            ],
            "features": list(self.feature_names),
            "macros": list(self.macro_names),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "CrispTree":
        features = tuple(payload["features"])
        macros = tuple(payload["macros"])
        nodes = {}
        for entry in payload["nodes"]:
            if entry["sense"] not in ("gt", "lt"):
                raise TreeError(f"bad sense {entry['sense']!r}")
            nodes[entry["id"]] = DecisionNode(
                feature=int(entry["feature"]),
                threshold=float(entry["threshold"]),
                greater_is_true=entry["sense"] == "gt",
                left=entry["left"],
                right=entry["right"],
            )
        leaves = {}
        for entry in payload["leaves"]:
            probs = np.array([entry["probs"].get(m, 0.0) for m in macros], dtype=np.float64)
            leaves[entry["id"]] = probs
        return cls(nodes=nodes, leaves=leaves, root=payload["root"],
                   feature_names=features, macro_names=macros)

    def copy(self) -> "CrispTree":
        return CrispTree(
            nodes=dict(self.nodes),
            leaves={k: v.copy() for k, v in self.leaves.items()},
            root=self.root,
            feature_names=self.feature_names,
            macro_names=self.macro_names,
        )

    def render(self) -> str:
        """Indented text form with feature/macro names."""
        lines: list[str] = []

        def walk(node_id: str, indent: int, tag: str):
            pad = "  " * indent
            if node_id in self.leaves:
                probs = self.leaves[node_id]
                parts = [
                    f"{self.macro_names[i]}={probs[i]:.2f}"
                    for i in np.argsort(-probs)
                    if probs[i] > 0.005
                ]
                lines.append(f"{pad}{tag}[{node_id}] {' '.join(parts) or 'uniform'}")
                return
            n = self.nodes[node_id]
            op = ">" if n.greater_is_true else "<"
            lines.append(f"{pad}{tag}[{node_id}] {self.feature_names[n.feature]} {op} {n.threshold:g}?")
            walk(n.left, indent + 1, "yes: ")
            walk(n.right, indent + 1, "no:  ")

        walk(self.root, 0, "")
        return "\n".join(lines)


def all_binary_inputs(dim: int) -> np.ndarray:
    """All 2^dim binary feature vectors, row-major by integer value."""
    count = 1 << dim
    ints = np.arange(count, dtype=np.int64)
    return ((ints[:, None] >> np.arange(dim - 1, -1, -1)) & 1).astype(np.float64)


def certify_equivalent(a: CrispTree, b: CrispTree) -> bool:
    """Exact behavioral equality over every binary input: reached leaves
    must carry identical action distributions."""
    if a.feature_names != b.feature_names or a.macro_names != b.macro_names:
        raise TreeError("trees use different feature/macro tables")
    X = all_binary_inputs(len(a.feature_names))
    ia = a.eval_leaf_batch(X)
    ib = b.eval_leaf_batch(X)
    pa = np.stack([a.leaves[lid] for lid in sorted(a.leaves)])[ia]
    pb = np.stack([b.leaves[lid] for lid in sorted(b.leaves)])[ib]
    return bool(np.array_equal(pa, pb))
