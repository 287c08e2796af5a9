// Between-round tree panel: top-down node/leaf boxes with feature
// dropdowns, probability sliders with live renormalization, validation
// badges, and the submit flow. Read-only in static-interpretable mode.

import { Api, ApiError } from "./api.js";
import { EditorGraph } from "./editor-graph.js";
import { DocPayload, MAX_DEPTH } from "./model.js";

export class EditorPanel {
  graph: EditorGraph | null = null;
  private doc: DocPayload | null = null;

  constructor(
    private api: Api,
    private rootEl: HTMLElement,
    private sessionId: string,
    private readOnly: boolean,
    private onStatus: (text: string) => void,
  ) {}

  async load() {
    const { document: doc } = await this.api.policy(this.sessionId);
    this.doc = doc;
    this.graph = EditorGraph.fromDocument(doc);
    this.render();
  }

  render() {
    const g = this.graph;
    this.rootEl.innerHTML = "";
    if (!g) return;
    const badges = document.createElement("div");
    badges.className = "badges";
    const depth = g.depth();
    const depthBadge = document.createElement("span");
    depthBadge.className = depth > MAX_DEPTH ? "badge bad" : "badge";
    depthBadge.textContent = `depth ${depth}/${MAX_DEPTH}`;
    badges.appendChild(depthBadge);
    const leavesBadge = document.createElement("span");
    leavesBadge.className = g.leaves.size > 16 ? "badge bad" : "badge";
    leavesBadge.textContent = `${g.leaves.size}/16 leaves`;
    badges.appendChild(leavesBadge);
    for (const v of g.violations()) {
      const b = document.createElement("span");
      b.className = "badge bad";
      b.textContent = v;
      badges.appendChild(b);
    }
    this.rootEl.appendChild(badges);
    this.rootEl.appendChild(this.renderSubtree(g.root));

    if (!this.readOnly) {
      const bar = document.createElement("div");
      bar.className = "editor-actions";
      const submit = document.createElement("button");
      submit.textContent = g.dirty ? `Submit ${g.opsBatch().length} change(s)` : "No changes";
      submit.disabled = !g.dirty;
      submit.onclick = () => void this.submit();
      const discard = document.createElement("button");
      discard.textContent = "Reload";
      discard.onclick = () => void this.load();
      bar.append(submit, discard);
      this.rootEl.appendChild(bar);
    }
  }

  private renderSubtree(id: string): HTMLElement {
    const g = this.graph!;
    const el = document.createElement("div");
    const node = g.nodes.get(id);
    if (node) {
      el.className = "tree-node";
      const head = document.createElement("div");
      head.className = "node-head";
      const featureSel = document.createElement("select");
      g.features.forEach((name, i) => {
        const opt = document.createElement("option");
        opt.value = String(i);
        opt.textContent = name;
        opt.selected = i === node.feature;
        featureSel.appendChild(opt);
      });
      const senseSel = document.createElement("select");
      for (const s of ["gt", "lt"]) {
        const opt = document.createElement("option");
        opt.value = s;
        opt.textContent = s === "gt" ? "> threshold" : "< threshold";
        opt.selected = s === node.sense;
        senseSel.appendChild(opt);
      }
      const threshold = document.createElement("input");
      threshold.type = "number";
      threshold.step = "0.1";
      threshold.value = String(node.threshold);
      threshold.className = "threshold";
      const apply = () => {
        const r = g.changeFeature(id, Number(featureSel.value),
                                  Number(threshold.value),
                                  senseSel.value as "gt" | "lt");
        this.onStatus(r.ok ? "" : r.error ?? "");
        this.render();
      };
      featureSel.disabled = senseSel.disabled = threshold.disabled = this.readOnly;
      featureSel.onchange = senseSel.onchange = threshold.onchange = apply;
      head.append(`[${id}] `, featureSel, senseSel, threshold);
      if (!this.readOnly) {
        for (const keep of ["left", "right"] as const) {
          const btn = document.createElement("button");
          btn.textContent = `remove, keep ${keep === "left" ? "yes" : "no"}`;
          btn.onclick = () => {
            const r = g.removeNode(id, keep);
            this.onStatus(r.ok ? "" : r.error ?? "");
            this.render();
          };
          head.appendChild(btn);
        }
      }
      el.appendChild(head);
      const yes = document.createElement("div");
      yes.className = "branch";
      yes.append("yes:", this.renderSubtree(node.left));
      const no = document.createElement("div");
      no.className = "branch";
      no.append("no:", this.renderSubtree(node.right));
      el.append(yes, no);
      return el;
    }

    el.className = "tree-leaf";
    const probs = g.leaves.get(id)!;
    const title = document.createElement("div");
    title.textContent = `[${id}]`;
    el.appendChild(title);
    const sliders: HTMLInputElement[] = [];
    g.macros.forEach((macro, i) => {
      const row = document.createElement("label");
      row.className = "prob-row";
      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = "0";
      slider.max = "1";
      slider.step = "0.01";
      slider.value = String(probs[i]);
      slider.disabled = this.readOnly;
      sliders.push(slider);
      const value = document.createElement("span");
      value.textContent = probs[i].toFixed(2);
      slider.oninput = () => {
        // Live renormalization preview across the leaf's sliders.
        const raw = sliders.map((s) => Number(s.value));
        const norm = EditorGraph.normalize(raw);
        if (norm) {
          row.parentElement?.querySelectorAll(".prob-row span").forEach((span, j) => {
            (span as HTMLElement).textContent = norm[j].toFixed(2);
          });
        }
      };
      slider.onchange = () => {
        const raw = sliders.map((s) => Number(s.value));
        const norm = EditorGraph.normalize(raw);
        if (!norm) {
          this.onStatus("probabilities must be positive somewhere");
          return;
        }
        const r = g.editLeaf(id, norm);
        this.onStatus(r.ok ? "" : r.error ?? "");
        this.render();
      };
      row.append(macro, slider, value);
      el.appendChild(row);
    });
    if (!this.readOnly) {
      const split = document.createElement("button");
      split.textContent = "split leaf";
      const allowed = g.canAddNode(id);
      split.disabled = !allowed;
      split.title = allowed ? "" : `blocked: depth ${MAX_DEPTH} / 16-leaf cap`;
      split.onclick = () => {
        const uniform = new Array(g.macros.length).fill(1 / g.macros.length);
        const r = g.addNode(id, 0, 0.5, "gt", [...probs], uniform);
        this.onStatus(r.ok ? "" : r.error ?? "");
        this.render();
      };
      el.appendChild(split);
      if (!allowed) {
        const note = document.createElement("span");
        note.className = "badge bad";
        note.textContent = `depth ${MAX_DEPTH} cap`;
        el.appendChild(note);
      }
    }
    return el;
  }

  async submit() {
    const g = this.graph;
    if (!g || !g.dirty) return;
    try {
      const { document: doc } = await this.api.submitEdits(
        this.sessionId, g.opsBatch(), g.baseHash);
      this.doc = doc;
      this.graph = EditorGraph.fromDocument(doc);
      this.onStatus(`saved (${doc.hash.slice(0, 8)})`);
      this.render();
    } catch (err) {
      const detail = err instanceof ApiError ? `${err.status}: ${err.message}` : String(err);
      this.onStatus(`rejected - ${detail}`);
      await this.load(); // server state wins; atomic rejection discarded nothing
    }
  }
}
