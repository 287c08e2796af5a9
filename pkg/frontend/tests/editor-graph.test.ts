import { describe, expect, it } from "vitest";

import { EditorGraph } from "../src/editor-graph.js";
import { DocPayload, MAX_DEPTH, MAX_LEAVES } from "../src/model.js";

const FEATURES = [
  "held_onion", "held_tomato", "held_dish", "held_soup", "partner_held_anything",
  "pot1_needs_ingredients", "pot1_cooking", "pot1_ready",
  "pot2_needs_ingredients", "pot2_cooking", "pot2_ready",
  "onion_on_shared_counter", "tomato_or_dish_on_shared_counter",
];
const MACROS = ["get_onion", "get_tomato", "get_dish", "get_soup",
  "place_in_pot", "place_on_counter", "serve", "wait"];

function onehot(i: number): number[] {
  const p = new Array(MACROS.length).fill(0);
  p[i] = 1;
  return p;
}

function doc(): DocPayload {
  return {
    schema_version: 1,
    layout: "forced_coordination",
    tree: {
      root: "n0",
      nodes: [{ id: "n0", feature: 3, threshold: 0.5, sense: "gt", left: "l0", right: "l1" }],
      leaves: [
        { id: "l0", probs: Object.fromEntries(MACROS.map((m, i) => [m, i === 6 ? 1 : 0])) },
        { id: "l1", probs: Object.fromEntries(MACROS.map((m, i) => [m, i === 7 ? 1 : 0])) },
      ],
      features: FEATURES,
      macros: MACROS,
    },
    provenance: [],
    parent_hash: null,
    hash: "abc",
  };
}

describe("EditorGraph", () => {
  it("loads a document and reports structure", () => {
    const g = EditorGraph.fromDocument(doc());
    expect(g.depth()).toBe(1);
    expect(g.leaves.size).toBe(2);
    expect(g.violations()).toEqual([]);
    expect(g.dirty).toBe(false);
  });

  it("applies all four edit classes and records ops", () => {
    const g = EditorGraph.fromDocument(doc());
    expect(g.addNode("l1", 2, 0.5, "gt", onehot(3), onehot(7)).ok).toBe(true);
    expect(g.changeFeature("n0", 5, 0.5, "lt").ok).toBe(true);
    expect(g.editLeaf("l0", onehot(4)).ok).toBe(true);
    const newNode = [...g.nodes.keys()].find((id) => id !== "n0")!;
    expect(g.removeNode(newNode, "left").ok).toBe(true);
    expect(g.opsBatch().map((o) => o.op)).toEqual([
      "add_node", "change_feature", "edit_leaf", "remove_node",
    ]);
    expect(g.violations()).toEqual([]);
  });

  it("mirrors the server's fresh-id sequence", () => {
    const g = EditorGraph.fromDocument(doc());
    g.addNode("l1", 2, 0.5, "gt", onehot(0), onehot(1));
    // Node id and left-leaf id minted while l1 still exists (max suffix 1,
    // so n2/l2), right-leaf id after the left leaf lands (l3).
    expect(g.nodes.has("n2")).toBe(true);
    expect(g.leaves.has("l2")).toBe(true);
    expect(g.leaves.has("l3")).toBe(true);
    expect(g.leaves.has("l1")).toBe(false);
    expect(g.nodes.get("n2")).toMatchObject({ left: "l2", right: "l3" });
  });

  it("blocks splits past depth four with the cap visible", () => {
    const g = EditorGraph.fromDocument(doc());
    let target = "l0";
    for (let d = 1; d < MAX_DEPTH; d++) {
      expect(g.canAddNode(target)).toBe(true);
      expect(g.addNode(target, d, 0.5, "gt", onehot(0), onehot(1)).ok).toBe(true);
      target = [...g.leaves.keys()].find((id) => g.leafDepth(id) === d + 1)!;
    }
    expect(g.depth()).toBe(MAX_DEPTH);
    expect(g.canAddNode(target)).toBe(false);
    const blocked = g.addNode(target, 0, 0.5, "gt", onehot(0), onehot(1));
    expect(blocked.ok).toBe(false);
    expect(blocked.error).toMatch(/depth/);
  });

  it("blocks growth past sixteen leaves", () => {
    const g = EditorGraph.fromDocument(doc());
    while (g.leaves.size < MAX_LEAVES) {
      const target = [...g.leaves.keys()].reduce((a, b) =>
        g.leafDepth(a) <= g.leafDepth(b) ? a : b);
      expect(g.addNode(target, 1, 0.5, "gt", onehot(0), onehot(1)).ok).toBe(true);
    }
    const target = [...g.leaves.keys()][0];
    expect(g.canAddNode(target)).toBe(false);
  });

  it("rejects non-simplex probabilities but renormalizes near-simplex", () => {
    const g = EditorGraph.fromDocument(doc());
    expect(g.editLeaf("l0", new Array(8).fill(0.2)).ok).toBe(false);
    const near = onehot(0).map((p) => p * (1 + 4e-7));
    expect(g.editLeaf("l0", near).ok).toBe(true);
    const sum = g.leaves.get("l0")!.reduce((a, b) => a + b, 0);
    expect(Math.abs(sum - 1)).toBeLessThan(1e-12);
  });

  it("normalize helper scales any positive vector onto the simplex", () => {
    const norm = EditorGraph.normalize([2, 2, 0, 0, 0, 0, 0, 4])!;
    expect(norm[7]).toBeCloseTo(0.5, 12);
    expect(EditorGraph.normalize([0, 0, 0, 0, 0, 0, 0, 0])).toBeNull();
    expect(EditorGraph.normalize([-1, 2, 0, 0, 0, 0, 0, 0])).toBeNull();
  });

  it("remove at the root keeps the chosen child", () => {
    const g = EditorGraph.fromDocument(doc());
    expect(g.removeNode("n0", "right").ok).toBe(true);
    expect(g.root).toBe("l1");
    expect(g.nodes.size).toBe(0);
    expect(g.leaves.size).toBe(1);
  });

  it("fuzzed edit sequences never leave a client-valid graph in violation", () => {
    // Property backing the UI invariant: whatever sequence of attempted
    // edits, accepted ones keep depth/leaf/simplex constraints intact.
    let seed = 1234;
    const rand = () => {
      seed = (seed * 1103515245 + 12345) % 2147483648;
      return seed / 2147483648;
    };
    const g = EditorGraph.fromDocument(doc());
    let accepted = 0;
    let blocked = 0;
    for (let i = 0; i < 300; i++) {
      const leaves = [...g.leaves.keys()];
      const nodes = [...g.nodes.keys()];
      const pick = <T>(arr: T[]) => arr[Math.floor(rand() * arr.length)];
      const raw = Array.from({ length: 8 }, () => rand());
      const probs = rand() < 0.2 ? raw : EditorGraph.normalize(raw)!;
      let r;
      const kind = Math.floor(rand() * 4);
      if (kind === 0) {
        r = g.addNode(pick(leaves), Math.floor(rand() * 13), 0.5,
          rand() < 0.5 ? "gt" : "lt", probs, EditorGraph.normalize(raw)!);
      } else if (kind === 1 && nodes.length > 0) {
        r = g.removeNode(pick(nodes), rand() < 0.5 ? "left" : "right");
      } else if (kind === 2 && nodes.length > 0) {
        r = g.changeFeature(pick(nodes), Math.floor(rand() * 13), 0.5, "gt");
      } else {
        r = g.editLeaf(pick(leaves), probs);
      }
      if (r?.ok) accepted++;
      else blocked++;
      expect(g.depth()).toBeLessThanOrEqual(MAX_DEPTH);
      expect(g.leaves.size).toBeLessThanOrEqual(MAX_LEAVES);
      expect(g.violations()).toEqual([]);
    }
    expect(accepted).toBeGreaterThan(0);
    expect(blocked).toBeGreaterThan(0);
  });
});
