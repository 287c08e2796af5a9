"""Contextual pruning: remove splits that feature-range propagation proves
unreachable or redundant, preserving behavior exactly.

Every node carries a box of feasible per-feature intervals, seeded at
[0, 1]^d and refined by each ancestor split. A node whose threshold falls
outside its box has one unreachable branch; the node is replaced by the
reachable child. Passes repeat until a fixpoint since a promotion can
expose new redundancies; each pass is one breadth-first traversal.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .tree import CrispTree, DecisionNode


@dataclass(frozen=True)
class DomainBox:
    """Closed feasible interval per feature."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    @classmethod
    def full(cls, dim: int, lo: float = 0.0, hi: float = 1.0) -> "DomainBox":
        return cls(lo=(lo,) * dim, hi=(hi,) * dim)

    def refine(self, node: DecisionNode, branch_true: bool, binary: bool = True) -> "DomainBox":
        """Intersect with the half-interval the branch survives.

        With `binary`, endpoints snap to the attainable {0, 1} lattice
        (e.g. x >= 0.5 collapses to lo 1), which is what lets ancestor
        splits on the same feature read as redundant. Intervals stay
        real-valued so non-binary feature ranges also work.
        """
        lo, hi = list(self.lo), list(self.hi)
        f, t = node.feature, node.threshold
        if node.greater_is_true == branch_true:
            # Survivors satisfy x > t (gt taken) or x >= t (lt not taken).
            if node.greater_is_true:
                lo[f] = max(lo[f], math.nextafter(t, math.inf))
            else:
                lo[f] = max(lo[f], t)
        else:
            if node.greater_is_true:
                hi[f] = min(hi[f], t)
            else:
                hi[f] = min(hi[f], math.nextafter(t, -math.inf))
        if binary:
            if lo[f] > 0.0:
                lo[f] = max(lo[f], 1.0)
            if hi[f] < 1.0:
                hi[f] = min(hi[f], 0.0)
        return DomainBox(lo=tuple(lo), hi=tuple(hi))


@dataclass
class PruneReport:
    nodes_before: int
    nodes_after: int
    leaves_before: int
    leaves_after: int
    depth_before: int
    depth_after: int
    pruned_node_ids: list[str] = field(default_factory=list)
    passes: int = 0
    max_visits_per_pass: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def set_node_domains(
    tree: CrispTree,
    min_value: float = 0.0,
    max_value: float = 1.0,
    binary_features: bool = True,
) -> dict[str, DomainBox]:
    """Breadth-first domain propagation; returns a box per node and leaf."""
    dim = len(tree.feature_names)
    boxes: dict[str, DomainBox] = {tree.root: DomainBox.full(dim, min_value, max_value)}
    queue = deque([tree.root])
    while queue:
        nid = queue.popleft()
        if nid in tree.leaves:
            continue
        node = tree.nodes[nid]
        box = boxes[nid]
        boxes[node.left] = box.refine(node, branch_true=True, binary=binary_features)
        boxes[node.right] = box.refine(node, branch_true=False, binary=binary_features)
        queue.append(node.left)
        queue.append(node.right)
    return boxes


def _unreachable_branch(node: DecisionNode, box: DomainBox) -> str | None:
    """'right' when the test always passes, 'left' when it never can."""
    lo, hi = box.lo[node.feature], box.hi[node.feature]
    t = node.threshold
    if node.greater_is_true:
        if t < lo:
            return "right"  # every feasible x exceeds t
        if t >= hi:
            return "left"  # no feasible x exceeds t
    else:
        if t > hi:
            return "right"
        if t <= lo:
            return "left"
    return None


def prune(tree: CrispTree, binary_features: bool = True) -> tuple[CrispTree, PruneReport]:
    """Remove all provably one-sided splits; behavior on reachable inputs
    is unchanged (see certify_equivalent)."""
    report = PruneReport(
        nodes_before=tree.n_nodes,
        nodes_after=tree.n_nodes,
        leaves_before=tree.n_leaves,
        leaves_after=tree.n_leaves,
        depth_before=tree.depth(),
        depth_after=tree.depth(),
    )
    current = tree.copy()
    while True:
        report.passes += 1
        boxes = set_node_domains(current, binary_features=binary_features)
        visits = 0
        promote: dict[str, str] = {}
        queue = deque([current.root])
        while queue:
            nid = queue.popleft()
            visits += 1
            if nid in current.leaves:
                continue
            node = current.nodes[nid]
            gone = _unreachable_branch(node, boxes[nid])
            if gone is not None:
                promote[nid] = node.right if gone == "left" else node.left
            queue.append(node.left)
            queue.append(node.right)
        report.max_visits_per_pass = max(report.max_visits_per_pass, visits)
        if not promote:
            break
        report.pruned_node_ids.extend(sorted(promote))
        current = _rebuild(current, promote)
    report.nodes_after = current.n_nodes
    report.leaves_after = current.n_leaves
    report.depth_after = current.depth()
    return current, report


def _rebuild(tree: CrispTree, promote: dict[str, str]) -> CrispTree:
    """New tree with each promoted node replaced by its surviving child."""

    def resolve(nid: str) -> str:
        while nid in promote:
            nid = promote[nid]
        return nid

    nodes: dict[str, DecisionNode] = {}
    leaves: dict[str, np.ndarray] = {}
    root = resolve(tree.root)

    def walk(nid: str):
        if nid in tree.leaves:
            leaves[nid] = tree.leaves[nid]
            return
        node = tree.nodes[nid]
        left, right = resolve(node.left), resolve(node.right)
        nodes[nid] = DecisionNode(node.feature, node.threshold, node.greater_is_true, left, right)
        walk(left)
        walk(right)

    walk(root)
    return CrispTree(nodes=nodes, leaves=leaves, root=root,
                     feature_names=tree.feature_names, macro_names=tree.macro_names)
