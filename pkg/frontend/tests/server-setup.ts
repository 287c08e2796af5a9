// Global setup for the round-trip tests: boots the real teaming service
// with a seeded registry in a temp dir, waits for /health, kills it after.

import { spawn, execSync, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { BASE, SERVER_PORT } from "./server-base.js";

const SEED_SCRIPT = `
import numpy as np
from treechef.policy import document_for_tree
from treechef.service import PolicyRegistry
from treechef.tree import CrispTree, DecisionNode
from treechef.features import FEATURE_NAMES
from treechef.planning import MACRO_NAMES
p = np.zeros(8); p[6] = 1.0
q = np.full(8, 0.02); q[7] = 1 - 0.02 * 7
tree = CrispTree(nodes={'n0': DecisionNode(3, 0.5, True, 'l0', 'l1')},
                 leaves={'l0': p, 'l1': q}, root='n0',
                 feature_names=FEATURE_NAMES, macro_names=MACRO_NAMES)
reg = PolicyRegistry('registry')
for name in ('forced_coordination', 'optional_collaboration', 'coordination_ring'):
    reg.register_tree(name, document_for_tree(tree, name, event='pretrained'))
`;

let proc: ChildProcess | null = null;

export default async function setup() {
  const cwd = mkdtempSync(join(tmpdir(), "treechef-ui-"));
  execSync(`python3 -c "${SEED_SCRIPT.replaceAll('"', '\\"')}"`, { cwd });
  proc = spawn(
    "python3",
    ["-m", "treechef.cli", "serve", "--registry", "registry", "--data-dir", "data",
     "--port", String(SERVER_PORT), "--tick-rate", "0"],
    { cwd, stdio: "ignore" },
  );
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/health`);
      if (res.ok) break;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) {
      proc.kill();
      throw new Error("teaming service did not come up on " + BASE);
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  return () => {
    proc?.kill();
  };
}
