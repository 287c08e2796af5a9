"""Pretrained-policy registry: one starting policy per (layout, kind).

Layout `L` resolves tree documents from `<registry>/L.policy.json` and
dense fictitious-co-play weights from `<registry>/L.fcp.weights`.
"""

from __future__ import annotations

import os

from ..policy import PolicyDocument, deserialize, serialize
from ..training.policies import DensePolicy


class NoPretrainedPolicy(LookupError):
    pass


class PolicyRegistry:
    def __init__(self, root: str):
        self.root = root
        os.makedirs(root, exist_ok=True)

    def _tree_path(self, layout: str) -> str:
        return os.path.join(self.root, f"{layout}.policy.json")

    def _dense_path(self, layout: str) -> str:
        return os.path.join(self.root, f"{layout}.fcp.weights")

    def tree_document(self, layout: str) -> PolicyDocument:
        path = self._tree_path(layout)
        if not os.path.exists(path):
            raise NoPretrainedPolicy(f"no tree policy registered for layout {layout!r}")
        with open(path, "rb") as fh:
            return deserialize(fh.read())

    def dense_policy(self, layout: str) -> DensePolicy:
        path = self._dense_path(layout)
        if not os.path.exists(path):
            raise NoPretrainedPolicy(f"no fcp weights registered for layout {layout!r}")
        return DensePolicy.load_weights(path)

    def register_tree(self, layout: str, doc: PolicyDocument):
        with open(self._tree_path(layout), "wb") as fh:
            fh.write(serialize(doc))

    def register_dense(self, layout: str, net: DensePolicy):
        net.save_weights(self._dense_path(layout))
