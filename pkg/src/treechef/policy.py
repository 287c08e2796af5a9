"""Policy documents: the canonical on-disk/wire form of a tree policy,
plus the human edit operations with the depth-4 / 16-leaf cap.

Documents are immutable; every edit produces a new document whose
provenance extends the parent's and whose content hash covers the
semantic fields (layout, tables, tree). Lineage is a compare-and-swap
chain on parent_hash so concurrent editors cannot silently clobber.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .features import FEATURE_NAMES
from .planning import MACRO_NAMES
from .tree import CrispTree, DecisionNode, TreeError

SCHEMA_VERSION = 1
MAX_EDIT_DEPTH = 4
MAX_EDIT_LEAVES = 16


class SchemaError(ValueError):
    """Document malformed; .path points at the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class UnknownNode(KeyError):
    pass


class InvalidProbs(ValueError):
    pass


class DepthLimitExceeded(ValueError):
    pass


class StaleParent(RuntimeError):
    """Compare-and-swap failure: the edit's parent is no longer current."""


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolicyDocument:
    layout: str
    tree: CrispTree
    provenance: tuple[dict, ...] = ()
    parent_hash: str | None = None
    schema_version: int = SCHEMA_VERSION

    @property
    def hash(self) -> str:
        return _content_hash(self)

    def with_event(self, event: str, note: str = "") -> "PolicyDocument":
        entry = {"event": event, "note": note, "at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
        return replace(self, provenance=self.provenance + (entry,))


def _semantic_payload(doc: PolicyDocument) -> dict:
    return {
        "schema_version": doc.schema_version,
        "layout": doc.layout,
        "tree": doc.tree.to_payload(),
    }


def _content_hash(doc: PolicyDocument) -> str:
    blob = json.dumps(_semantic_payload(doc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def serialize(doc: PolicyDocument) -> bytes:
    payload = _semantic_payload(doc)
    payload["provenance"] = list(doc.provenance)
    payload["parent_hash"] = doc.parent_hash
    payload["hash"] = doc.hash
    return json.dumps(payload, sort_keys=True, indent=1).encode()


def deserialize(data: bytes) -> PolicyDocument:
    try:
        payload = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(str(exc), path="/") from None
    for key in ("schema_version", "layout", "tree"):
        if key not in payload:
            raise SchemaError("missing field", path=f"/{key}")
    if payload["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported version {payload['schema_version']}", path="/schema_version")
    try:
        tree = CrispTree.from_payload(payload["tree"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad tree payload: {exc}", path="/tree") from None
    problems = tree.validate()
    if problems:
        raise SchemaError(problems[0], path="/tree")
    doc = PolicyDocument(
        layout=payload["layout"],
        tree=tree,
        provenance=tuple(payload.get("provenance", ())),
        parent_hash=payload.get("parent_hash"),
    )
    declared = payload.get("hash")
    if declared is not None and declared != doc.hash:
        raise SchemaError("content hash mismatch", path="/hash")
    return doc


def document_for_tree(tree: CrispTree, layout: str, event: str = "trained") -> PolicyDocument:
    return PolicyDocument(layout=layout, tree=tree).with_event(event)


def validate(doc: PolicyDocument, layout) -> list[dict]:
    """Machine-readable violations; empty iff the service can load the doc."""
    problems: list[dict] = []
    if doc.tree.feature_names != FEATURE_NAMES:
        problems.append({"code": "UnknownFeature", "path": "/tree/features",
                         "message": "feature table does not match the registered features"})
    if doc.tree.macro_names != MACRO_NAMES:
        problems.append({"code": "UnknownMacro", "path": "/tree/macros",
                         "message": "macro table does not match the registered macros"})
    if layout is not None and doc.layout != layout.name:
        problems.append({"code": "LayoutMismatch", "path": "/layout",
                         "message": f"document is for {doc.layout!r}, not {layout.name!r}"})
    for issue in doc.tree.validate():
        problems.append({"code": "InvalidTree", "path": "/tree", "message": issue})
    return problems


# ---------------------------------------------------------------------------
# Edit operations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AddNode:
    leaf_id: str
    feature: int
    threshold: float
    sense: str  # "gt" | "lt"
    left_leaf_probs: tuple[float, ...]
    right_leaf_probs: tuple[float, ...]


@dataclass(frozen=True)
class RemoveNode:
    node_id: str
    keep: str  # "left" | "right"


@dataclass(frozen=True)
class ChangeFeature:
    node_id: str
    feature: int
    threshold: float
    sense: str


@dataclass(frozen=True)
class EditLeaf:
    leaf_id: str
    probs: tuple[float, ...]


ModificationOp = AddNode | RemoveNode | ChangeFeature | EditLeaf


def _clean_probs(raw, n_actions: int) -> np.ndarray:
    probs = np.asarray(raw, dtype=np.float64)
    if probs.shape != (n_actions,):
        raise InvalidProbs(f"need {n_actions} probabilities, got shape {probs.shape}")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise InvalidProbs("probabilities must be finite and non-negative")
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-6:
        raise InvalidProbs(f"probabilities sum to {total}, not 1")
    return probs / total


def _fresh_id(tree: CrispTree, prefix: str) -> str:
    used = {int(k[1:]) for k in list(tree.nodes) + list(tree.leaves) if k[1:].isdigit()}
    nxt = max(used, default=-1) + 1
    return f"{prefix}{nxt}"


def apply_modification(tree: CrispTree, op: ModificationOp) -> CrispTree:
    """One edit, persistently: the input tree is untouched. Human edits are
    capped at depth 4 (and therefore 16 leaves); both are enforced."""
    out = tree.copy()
    n_actions = len(tree.macro_names)
    if isinstance(op, AddNode):
        if op.leaf_id not in out.leaves:
            raise UnknownNode(op.leaf_id)
        if op.sense not in ("gt", "lt"):
            raise SchemaError(f"bad sense {op.sense!r}", path="/op/sense")
        if not 0 <= op.feature < len(tree.feature_names):
            raise SchemaError(f"unknown feature {op.feature}", path="/op/feature")
        depth = out.leaf_depth(op.leaf_id)
        if depth + 1 > MAX_EDIT_DEPTH:
            raise DepthLimitExceeded(f"split at depth {depth} would exceed depth {MAX_EDIT_DEPTH}")
        left_p = _clean_probs(op.left_leaf_probs, n_actions)
        right_p = _clean_probs(op.right_leaf_probs, n_actions)
        new_node = _fresh_id(out, "n")
        left_id = _fresh_id(out, "l")
        del out.leaves[op.leaf_id]
        out.leaves[left_id] = left_p
        right_id = _fresh_id(out, "l")
        out.leaves[right_id] = right_p
        out.nodes[new_node] = DecisionNode(op.feature, float(op.threshold), op.sense == "gt",
                                           left_id, right_id)
        parent = tree.parent_of(op.leaf_id)
        if parent is None:
            out.root = new_node
        else:
            pid, side = parent
            p = out.nodes[pid]
            out.nodes[pid] = replace(p, **{side: new_node})
    elif isinstance(op, RemoveNode):
        if op.node_id not in out.nodes:
            raise UnknownNode(op.node_id)
        if op.keep not in ("left", "right"):
            raise SchemaError(f"keep must be left|right, got {op.keep!r}", path="/op/keep")
        node = out.nodes[op.node_id]
        kept = node.left if op.keep == "left" else node.right
        dropped = node.right if op.keep == "left" else node.left
        parent = tree.parent_of(op.node_id)
        del out.nodes[op.node_id]
        _drop_subtree(out, dropped)
        if parent is None:
            out.root = kept
        else:
            pid, side = parent
            out.nodes[pid] = replace(out.nodes[pid], **{side: kept})
    elif isinstance(op, ChangeFeature):
        if op.node_id not in out.nodes:
            raise UnknownNode(op.node_id)
        if op.sense not in ("gt", "lt"):
            raise SchemaError(f"bad sense {op.sense!r}", path="/op/sense")
        if not 0 <= op.feature < len(tree.feature_names):
            raise SchemaError(f"unknown feature {op.feature}", path="/op/feature")
        node = out.nodes[op.node_id]
        out.nodes[op.node_id] = DecisionNode(op.feature, float(op.threshold),
                                             op.sense == "gt", node.left, node.right)
    elif isinstance(op, EditLeaf):
        if op.leaf_id not in out.leaves:
            raise UnknownNode(op.leaf_id)
        out.leaves[op.leaf_id] = _clean_probs(op.probs, n_actions)
    else:
        raise TypeError(f"not a modification op: {op!r}")

    if out.depth() > MAX_EDIT_DEPTH:
        raise DepthLimitExceeded(f"tree depth {out.depth()} exceeds {MAX_EDIT_DEPTH}")
    if out.n_leaves > MAX_EDIT_LEAVES:
        raise DepthLimitExceeded(f"{out.n_leaves} leaves exceeds {MAX_EDIT_LEAVES}")
    problems = out.validate()
    if problems:
        raise SchemaError(problems[0], path="/tree")
    return out


def _drop_subtree(tree: CrispTree, node_id: str):
    if node_id in tree.leaves:
        del tree.leaves[node_id]
        return
    node = tree.nodes.pop(node_id)
    _drop_subtree(tree, node.left)
    _drop_subtree(tree, node.right)


def apply_ops(doc: PolicyDocument, ops, expected_parent: str | None = None) -> PolicyDocument:
    """Apply a batch atomically: any failure leaves the document as-is."""
    if expected_parent is not None and expected_parent != doc.hash:
        raise StaleParent(f"expected parent {expected_parent[:12]}, have {doc.hash[:12]}")
    tree = doc.tree
    for op in ops:
        tree = apply_modification(tree, op)
    new_doc = PolicyDocument(layout=doc.layout, tree=tree,
                             provenance=doc.provenance, parent_hash=doc.hash)
    return new_doc.with_event("edited", note=f"{len(list(ops))} op(s)")


def op_from_payload(payload: dict) -> ModificationOp:
    kind = payload.get("op")
    try:
        if kind == "add_node":
            return AddNode(
                leaf_id=payload["leaf_id"], feature=int(payload["feature"]),
                threshold=float(payload.get("threshold", 0.5)), sense=payload.get("sense", "gt"),
                left_leaf_probs=tuple(payload["left_leaf_probs"]),
                right_leaf_probs=tuple(payload["right_leaf_probs"]),
            )
        if kind == "remove_node":
            return RemoveNode(node_id=payload["node_id"], keep=payload["keep"])
        if kind == "change_feature":
            return ChangeFeature(
                node_id=payload["node_id"], feature=int(payload["feature"]),
                threshold=float(payload.get("threshold", 0.5)), sense=payload.get("sense", "gt"),
            )
        if kind == "edit_leaf":
            return EditLeaf(leaf_id=payload["leaf_id"], probs=tuple(payload["probs"]))
    except KeyError as exc:
        raise SchemaError(f"missing field {exc}", path=f"/op[{kind}]") from None
    raise SchemaError(f"unknown op kind {kind!r}", path="/op")


def diff(a: PolicyDocument, b: PolicyDocument) -> list[str]:
    """Human-readable structural differences."""
    lines = []
    if a.layout != b.layout:
        lines.append(f"layout: {a.layout} -> {b.layout}")
    for nid in sorted(set(a.tree.nodes) | set(b.tree.nodes)):
        na, nb = a.tree.nodes.get(nid), b.tree.nodes.get(nid)
        if na == nb:
            continue
        if na is None:
            lines.append(f"+node {nid}: {_node_str(b.tree, nb)}")
        elif nb is None:
            lines.append(f"-node {nid}: {_node_str(a.tree, na)}")
        else:
            lines.append(f"~node {nid}: {_node_str(a.tree, na)} -> {_node_str(b.tree, nb)}")
    for lid in sorted(set(a.tree.leaves) | set(b.tree.leaves)):
        la, lb = a.tree.leaves.get(lid), b.tree.leaves.get(lid)
        if la is None:
            lines.append(f"+leaf {lid}")
        elif lb is None:
            lines.append(f"-leaf {lid}")
        elif not np.array_equal(la, lb):
            lines.append(f"~leaf {lid}")
    return lines


def _node_str(tree: CrispTree, n: DecisionNode) -> str:
    op = ">" if n.greater_is_true else "<"
    return f"{tree.feature_names[n.feature]} {op} {n.threshold:g}"
