// Client-side mirror of a tree policy under edit.
//
// Every mutation validates against the same rules the server enforces
// (known ids, simplex probabilities, depth <= 4, <= 16 leaves) before it
// is applied and recorded as a pending op, so a batch this graph marks
// valid is never rejected server-side. Fresh ids replicate the server's
// numbering so the submitted document equals the editor state.

import {
  DocPayload,
  MAX_DEPTH,
  MAX_LEAVES,
  ModOp,
  TreeNodePayload,
  TreePayload,
} from "./model.js";

export interface EditResult {
  ok: boolean;
  error?: string;
}

interface NodeRec {
  feature: number;
  threshold: number;
  sense: "gt" | "lt";
  left: string;
  right: string;
}

export class EditorGraph {
  nodes = new Map<string, NodeRec>();
  leaves = new Map<string, number[]>();
  root = "";
  features: string[] = [];
  macros: string[] = [];
  baseHash: string | null = null;
  pendingOps: ModOp[] = [];

  get dirty(): boolean {
    return this.pendingOps.length > 0;
  }

  static fromDocument(doc: DocPayload): EditorGraph {
    const g = new EditorGraph();
    g.features = [...doc.tree.features];
    g.macros = [...doc.tree.macros];
    g.root = doc.tree.root;
    g.baseHash = doc.hash;
    for (const n of doc.tree.nodes) {
      g.nodes.set(n.id, {
        feature: n.feature,
        threshold: n.threshold,
        sense: n.sense,
        left: n.left,
        right: n.right,
      });
    }
    for (const l of doc.tree.leaves) {
      g.leaves.set(l.id, g.macros.map((m) => l.probs[m] ?? 0));
    }
    return g;
  }

  // -- structure helpers ----------------------------------------------------

  depth(): number {
    const walk = (id: string): number => {
      const n = this.nodes.get(id);
      if (!n) return 0;
      return 1 + Math.max(walk(n.left), walk(n.right));
    };
    return walk(this.root);
  }

  leafDepth(leafId: string): number {
    const walk = (id: string, d: number): number | null => {
      if (id === leafId) return d;
      const n = this.nodes.get(id);
      if (!n) return null;
      return walk(n.left, d + 1) ?? walk(n.right, d + 1);
    };
    const found = walk(this.root, 0);
    if (found === null) throw new Error(`unknown leaf ${leafId}`);
    return found;
  }

  parentOf(childId: string): { id: string; side: "left" | "right" } | null {
    for (const [id, n] of this.nodes) {
      if (n.left === childId) return { id, side: "left" };
      if (n.right === childId) return { id, side: "right" };
    }
    return null;
  }

  canAddNode(leafId: string): boolean {
    return (
      this.leaves.has(leafId) &&
      this.leafDepth(leafId) + 1 <= MAX_DEPTH &&
      this.leaves.size + 1 <= MAX_LEAVES
    );
  }

  violations(): string[] {
    const out: string[] = [];
    if (this.depth() > MAX_DEPTH) out.push(`depth ${this.depth()} exceeds ${MAX_DEPTH}`);
    if (this.leaves.size > MAX_LEAVES) out.push(`${this.leaves.size} leaves exceed ${MAX_LEAVES}`);
    for (const [id, probs] of this.leaves) {
      const sum = probs.reduce((a, b) => a + b, 0);
      if (Math.abs(sum - 1) > 1e-6) out.push(`${id} probabilities sum to ${sum.toFixed(6)}`);
      if (probs.some((p) => p < 0)) out.push(`${id} has negative probability`);
    }
    for (const [id, n] of this.nodes) {
      if (n.feature < 0 || n.feature >= this.features.length) {
        out.push(`${id} splits on unknown feature ${n.feature}`);
      }
    }
    return out;
  }

  private freshId(prefix: "n" | "l"): string {
    let max = -1;
    for (const id of [...this.nodes.keys(), ...this.leaves.keys()]) {
      const suffix = Number(id.slice(1));
      if (Number.isInteger(suffix)) max = Math.max(max, suffix);
    }
    return `${prefix}${max + 1}`;
  }

  // -- edits ------------------------------------------------------------------

  static normalize(raw: number[]): number[] | null {
    if (raw.some((p) => p < 0 || !Number.isFinite(p))) return null;
    const sum = raw.reduce((a, b) => a + b, 0);
    if (sum <= 0) return null;
    return raw.map((p) => p / sum);
  }

  private simplexOrError(raw: number[]): { probs?: number[]; error?: string } {
    if (raw.length !== this.macros.length) {
      return { error: `need ${this.macros.length} probabilities` };
    }
    // Mirror the server: reject anything not within 1e-6 of a simplex.
    const sum = raw.reduce((a, b) => a + b, 0);
    if (raw.some((p) => p < 0 || !Number.isFinite(p))) {
      return { error: "probabilities must be finite and non-negative" };
    }
    if (Math.abs(sum - 1) > 1e-6) {
      return { error: `probabilities sum to ${sum.toFixed(6)}, not 1` };
    }
    return { probs: raw.map((p) => p / sum) };
  }

  addNode(
    leafId: string,
    feature: number,
    threshold: number,
    sense: "gt" | "lt",
    leftProbs: number[],
    rightProbs: number[],
  ): EditResult {
    if (!this.leaves.has(leafId)) return { ok: false, error: `unknown leaf ${leafId}` };
    if (feature < 0 || feature >= this.features.length) {
      return { ok: false, error: `unknown feature ${feature}` };
    }
    if (this.leafDepth(leafId) + 1 > MAX_DEPTH) {
      return { ok: false, error: `split would exceed depth ${MAX_DEPTH}` };
    }
    if (this.leaves.size + 1 > MAX_LEAVES) {
      return { ok: false, error: `would exceed ${MAX_LEAVES} leaves` };
    }
    const left = this.simplexOrError(leftProbs);
    if (left.error) return { ok: false, error: left.error };
    const right = this.simplexOrError(rightProbs);
    if (right.error) return { ok: false, error: right.error };

    // Mirror the server's id sequence exactly: node id and left-leaf id
    // are minted while the target leaf still exists, the right-leaf id
    // after the left leaf is inserted. The parent is resolved against the
    // pre-edit tree.
    const parent = this.parentOf(leafId);
    const nodeId = this.freshId("n");
    const leftId = this.freshId("l");
    this.leaves.delete(leafId);
    this.leaves.set(leftId, left.probs!);
    const rightId = this.freshId("l");
    this.leaves.set(rightId, right.probs!);
    this.nodes.set(nodeId, { feature, threshold, sense, left: leftId, right: rightId });
    if (parent === null) {
      this.root = nodeId;
    } else {
      this.nodes.get(parent.id)![parent.side] = nodeId;
    }
    this.pendingOps.push({
      op: "add_node",
      leaf_id: leafId,
      feature,
      threshold,
      sense,
      left_leaf_probs: left.probs!,
      right_leaf_probs: right.probs!,
    });
    return { ok: true };
  }

  removeNode(nodeId: string, keep: "left" | "right"): EditResult {
    const node = this.nodes.get(nodeId);
    if (!node) return { ok: false, error: `unknown node ${nodeId}` };
    const kept = keep === "left" ? node.left : node.right;
    const dropped = keep === "left" ? node.right : node.left;
    const parent = this.parentOf(nodeId);
    this.nodes.delete(nodeId);
    this.dropSubtree(dropped);
    if (parent === null) {
      this.root = kept;
    } else {
      this.nodes.get(parent.id)![parent.side] = kept;
    }
    this.pendingOps.push({ op: "remove_node", node_id: nodeId, keep });
    return { ok: true };
  }

  private dropSubtree(id: string) {
    const n = this.nodes.get(id);
    if (!n) {
      this.leaves.delete(id);
      return;
    }
    this.nodes.delete(id);
    this.dropSubtree(n.left);
    this.dropSubtree(n.right);
  }

  changeFeature(nodeId: string, feature: number, threshold: number, sense: "gt" | "lt"): EditResult {
    const node = this.nodes.get(nodeId);
    if (!node) return { ok: false, error: `unknown node ${nodeId}` };
    if (feature < 0 || feature >= this.features.length) {
      return { ok: false, error: `unknown feature ${feature}` };
    }
    node.feature = feature;
    node.threshold = threshold;
    node.sense = sense;
    this.pendingOps.push({ op: "change_feature", node_id: nodeId, feature, threshold, sense });
    return { ok: true };
  }

  editLeaf(leafId: string, rawProbs: number[]): EditResult {
    if (!this.leaves.has(leafId)) return { ok: false, error: `unknown leaf ${leafId}` };
    const cleaned = this.simplexOrError(rawProbs);
    if (cleaned.error) return { ok: false, error: cleaned.error };
    this.leaves.set(leafId, cleaned.probs!);
    this.pendingOps.push({ op: "edit_leaf", leaf_id: leafId, probs: cleaned.probs! });
    return { ok: true };
  }

  // -- serialization -----------------------------------------------------------

  opsBatch(): ModOp[] {
    return [...this.pendingOps];
  }

  clearPending(newHash: string | null = null) {
    this.pendingOps = [];
    if (newHash !== null) this.baseHash = newHash;
  }

  treePayload(): TreePayload {
    const nodes: TreeNodePayload[] = [...this.nodes.entries()]
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([id, n]) => ({ id, feature: n.feature, threshold: n.threshold,
                           sense: n.sense, left: n.left, right: n.right }));
    const leaves = [...this.leaves.entries()]
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([id, probs]) => ({
        id,
        probs: Object.fromEntries(this.macros.map((m, i) => [m, probs[i]])),
      }));
    return { root: this.root, nodes, leaves, features: [...this.features], macros: [...this.macros] };
  }
}
