// Thin typed client for the teaming-service HTTP API.

import { DocPayload, LayoutView, ModOp, SessionView } from "./model.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class Api {
  constructor(public base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await fetch(this.base + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await res.text();
    if (!res.ok) {
      let detail = text;
      try {
        detail = JSON.parse(text).error ?? text;
      } catch {
        /* plain text error */
      }
      throw new ApiError(res.status, detail);
    }
    return JSON.parse(text) as T;
  }

  layouts(): Promise<{ layouts: string[] }> {
    return this.request("GET", "/layouts");
  }

  layout(name: string): Promise<LayoutView> {
    return this.request("GET", `/layouts/${name}`);
  }

  createSession(body: {
    mode: string;
    layout: string;
    human_seat?: number;
    seed?: number;
    tutorial?: boolean;
  }): Promise<SessionView> {
    return this.request("POST", "/sessions", body);
  }

  session(id: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${id}`);
  }

  policy(id: string): Promise<{ document: DocPayload }> {
    return this.request("GET", `/sessions/${id}/policy`);
  }

  submitEdits(id: string, ops: ModOp[], parentHash: string | null): Promise<{ document: DocPayload }> {
    return this.request("PUT", `/sessions/${id}/policy`, {
      ops,
      parent_hash: parentHash,
    });
  }

  startEpisode(id: string): Promise<{
    episode_id: number;
    socket_path: string;
    tick_rate: number;
    horizon: number;
  }> {
    return this.request("POST", `/sessions/${id}/episodes`);
  }

  startOptimize(id: string): Promise<{ job_id: string; status: string }> {
    return this.request("POST", `/sessions/${id}/optimize`);
  }

  optimizeStatus(id: string): Promise<{
    job_id: string;
    status: string;
    progress: number;
    detail: string;
    accepted: boolean | null;
  }> {
    return this.request("GET", `/sessions/${id}/optimize/status`);
  }
}
