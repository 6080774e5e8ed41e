/**
 * Typed client for the streaming server API. The base URL is mutable so the
 * target server can be switched from the interface.
 */

import { DecodedFrame, decodeFrame } from "./wire.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string; signal?: AbortSignal }
) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  arrayBuffer(): Promise<ArrayBuffer>;
}>;

export interface TrajectoryMeta {
  id: string;
  name: string;
  description: string;
  source: string;
  format: string;
  n_atoms: number;
  n_frames: number;
  timestep_ps: number | null;
}

export interface TraceSpec {
  kind: "distance" | "angle" | "dihedral" | "rmsd";
  atoms: number[];
  reference_frame?: number;
  superpose?: boolean;
  sort?: "ascending" | "descending" | "by_frame";
  filter?: { min: number; max: number };
}

export interface TraceResult {
  kind: string;
  atoms: number[];
  unit: string;
  frames: number[];
  values: number[];
}

export interface SessionMeta {
  id: string;
  name: string;
  description: string;
  source: string;
  trajectories: string[];
  created_at: string;
  state_bytes: number;
}

export interface SessionFull extends SessionMeta {
  state: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class StreamApi {
  constructor(
    public baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init)
  ) {}

  setServer(baseUrl: string): void {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async requestJson<T>(path: string, init?: Parameters<FetchLike>[1]): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = `HTTP ${resp.status}`;
      try {
        const body = (await resp.json()) as { detail?: string };
        if (body && body.detail) detail = body.detail;
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  listTrajectories(): Promise<TrajectoryMeta[]> {
    return this.requestJson("/api/trajectories");
  }

  registerTrajectory(req: {
    url: string;
    name: string;
    description: string;
    source: string;
  }): Promise<TrajectoryMeta> {
    return this.requestJson("/api/trajectories", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  getMeta(id: string): Promise<TrajectoryMeta> {
    return this.requestJson(`/api/traj/${id}/meta`);
  }

  async getFrame(id: string, frame: number, opts?: {
    atoms?: number[];
    signal?: AbortSignal;
  }): Promise<DecodedFrame> {
    let path = `/api/traj/${id}/frame/${frame}`;
    if (opts?.atoms && opts.atoms.length > 0) {
      path += `?atoms=${opts.atoms.join(",")}`;
    }
    const resp = await this.fetchImpl(this.baseUrl + path, { signal: opts?.signal });
    if (!resp.ok) {
      throw new ApiError(resp.status, `frame request failed: HTTP ${resp.status}`);
    }
    return decodeFrame(await resp.arrayBuffer());
  }

  computeTrace(id: string, spec: TraceSpec): Promise<TraceResult> {
    return this.requestJson(`/api/traj/${id}/trace`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(spec),
    });
  }

  listSessions(): Promise<SessionMeta[]> {
    return this.requestJson("/api/sessions");
  }

  saveSession(req: {
    name: string;
    description: string;
    source: string;
    state: string;
    trajectories: string[];
  }): Promise<SessionMeta> {
    return this.requestJson("/api/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  getSession(id: string): Promise<SessionFull> {
    return this.requestJson(`/api/session/${id}`);
  }
}
