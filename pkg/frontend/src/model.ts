// Wire types mirroring the teaming-service schemas.

export interface TreeNodePayload {
  id: string;
  feature: number;
  threshold: number;
  sense: "gt" | "lt";
  left: string;
  right: string;
}

export interface LeafPayload {
  id: string;
  probs: Record<string, number>;
}

export interface TreePayload {
  root: string;
  nodes: TreeNodePayload[];
  leaves: LeafPayload[];
  features: string[];
  macros: string[];
}

export interface DocPayload {
  schema_version: number;
  layout: string;
  tree: TreePayload;
  provenance: { event: string; note: string; at: string }[];
  parent_hash: string | null;
  hash: string;
}

export interface SessionView {
  id: string;
  mode: string;
  tutorial: boolean;
  layout: string;
  human_seat: number;
  iteration: number;
  max_iterations: number;
  phase: "idle" | "playing" | "optimizing";
  episodes_completed: number;
  policy_hash: string | null;
  can_view_policy: boolean;
  can_edit_policy: boolean;
}

export interface LayoutView {
  name: string;
  grid: string[];
  shared_counters: number[][];
  cook_time: number;
  horizon: number;
  recipes: Record<string, number>;
}

export interface PlayerState {
  pos: number[];
  facing: number;
  held: { kind: string; contents: string[] } | null;
}

export interface WorldState {
  players: PlayerState[];
  pots: Record<string, { contents: string[]; timer: number | null; state: string }>;
  counters: Record<string, { kind: string; contents: string[] }>;
  t: number;
  score: number;
}

export interface StartMessage {
  type: "start";
  episode_id: number;
  grid: string[];
  horizon: number;
  human_seat: number;
  state: WorldState;
}

export interface TickMessage {
  type: "tick";
  t: number;
  score: number;
  rewards: number[];
  done: boolean;
  state: WorldState;
  ai_macro?: string;
}

export interface EndMessage {
  type: "end";
  status: "completed" | "disconnected";
  score: number;
}

export type ServerMessage = StartMessage | TickMessage | EndMessage;

export type ModOp =
  | {
      op: "add_node";
      leaf_id: string;
      feature: number;
      threshold: number;
      sense: "gt" | "lt";
      left_leaf_probs: number[];
      right_leaf_probs: number[];
    }
  | { op: "remove_node"; node_id: string; keep: "left" | "right" }
  | { op: "change_feature"; node_id: string; feature: number; threshold: number; sense: "gt" | "lt" }
  | { op: "edit_leaf"; leaf_id: string; probs: number[] };

export const MAX_DEPTH = 4;
export const MAX_LEAVES = 16;

// Browser key events to the wire protocol's key names.
export const KEY_MAP: Record<string, string> = {
  ArrowUp: "up",
  ArrowDown: "down",
  ArrowLeft: "left",
  ArrowRight: "right",
  " ": "space",
  Space: "space",
};
