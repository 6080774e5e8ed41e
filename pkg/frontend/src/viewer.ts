/**
 * Application wiring: panels for sessions, trajectory registration, Zenodo
 * import, playback and the navigable time-trace plot.
 *
 * Sessions are addressed by URL hash (#session/<id>), so sharing a view is
 * sharing a link.
 */

import { ApiError, StreamApi, TraceResult, TrajectoryMeta, TraceSpec } from "./api.js";
import { ClientStructure, parsePdb } from "./pdb.js";
import { FramePlayer } from "./player.js";
import { StructureRenderer } from "./render.js";
import {
  MeasurementEntry,
  SessionState,
  deserializeSession,
  emptySession,
  serializeSession,
} from "./session.js";
import { TracePlot } from "./traceplot.js";
import { DecodedFrame } from "./wire.js";
import { NoSupportedFilesError, availableKinds, fetchRecord, filterByType, RemoteFile } from "./zenodo.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export class ViewerApp {
  api: StreamApi;
  state: SessionState = emptySession();
  structure: ClientStructure | null = null;
  player: FramePlayer | null = null;
  renderer: StructureRenderer;
  tracePlot: TracePlot;
  currentFrame: DecodedFrame | null = null;
  currentTrace: TraceResult | null = null;
  trajectories: TrajectoryMeta[] = [];

  constructor(defaultServer: string) {
    this.api = new StreamApi(defaultServer);
    this.renderer = new StructureRenderer(el<HTMLCanvasElement>("view3d"));
    this.tracePlot = new TracePlot(el<HTMLCanvasElement>("traceplot"));
    this.tracePlot.onSeek = (frame) => void this.seek(frame);
    el<HTMLInputElement>("server-address").value = defaultServer;
  }

  // -- notices ------------------------------------------------------------

  notify(message: string, isError = false): void {
    const banner = el<HTMLDivElement>("notice");
    banner.textContent = message;
    banner.className = isError ? "notice error" : "notice";
    banner.style.display = message ? "block" : "none";
  }

  // -- server / sessions ----------------------------------------------------

  targetServer(): string {
    return el<HTMLInputElement>("server-address").value.replace(/\/+$/, "");
  }

  async refreshSessions(): Promise<void> {
    this.api.setServer(this.targetServer());
    const sessions = await this.api.listSessions();
    const list = el<HTMLUListElement>("session-list");
    list.innerHTML = "";
    for (const s of sessions) {
      const item = document.createElement("li");
      const link = document.createElement("a");
      link.href = `#session/${s.id}`;
      link.textContent = s.name || s.id;
      link.title = `${s.description}\nsource: ${s.source}\n${s.created_at}`;
      item.appendChild(link);
      list.appendChild(item);
    }
  }

  async refreshTrajectories(): Promise<void> {
    this.api.setServer(this.targetServer());
    this.trajectories = await this.api.listTrajectories();
    const select = el<HTMLSelectElement>("traj-select");
    select.innerHTML = "";
    for (const t of this.trajectories) {
      const option = document.createElement("option");
      option.value = t.id;
      option.textContent = `${t.name || t.id} (${t.n_frames} frames, ${t.n_atoms} atoms)`;
      select.appendChild(option);
    }
  }

  async openSessionFromHash(): Promise<void> {
    const match = window.location.hash.match(/^#session\/(.+)$/);
    if (!match) return;
    try {
      const full = await this.api.getSession(match[1]);
      this.notify(`opened session "${full.name}" (${full.source})`);
      const info = el<HTMLDivElement>("session-info");
      info.textContent =
        `${full.name} — ${full.description} [${full.source}] · ` +
        `trajectories: ${full.trajectories.length ? full.trajectories.join(", ") : "none"}`;
      await this.restoreState(deserializeSession(full.state));
    } catch (err) {
      this.notify(`cannot open session: ${(err as Error).message}`, true);
    }
  }

  async restoreState(state: SessionState): Promise<void> {
    this.state = state;
    if (state.structurePdb) {
      this.structure = parsePdb(state.structurePdb);
      el<HTMLSpanElement>("structure-name").textContent = state.structureName ?? "structure";
    }
    this.renderer.representation = state.representation;
    el<HTMLSelectElement>("representation").value = state.representation;
    if (state.trajectoryId) {
      await this.refreshTrajectories();
      el<HTMLSelectElement>("traj-select").value = state.trajectoryId;
      await this.matchTrajectory(state.trajectoryId, { quiet: true });
      await this.seek(state.frame);
    }
    this.renderMeasurementList();
    if (state.measurements.length > 0) {
      await this.showTrace(state.measurements[0]);
    }
  }

  async uploadSession(): Promise<void> {
    const name = el<HTMLInputElement>("session-name").value.trim();
    if (!name) {
      this.notify("session needs a name", true);
      return;
    }
    this.api.setServer(this.targetServer());
    this.state.frame = this.player?.current ?? 0;
    const meta = await this.api.saveSession({
      name,
      description: el<HTMLInputElement>("session-description").value,
      source: el<HTMLInputElement>("session-source").value,
      state: serializeSession(this.state),
      trajectories: this.state.trajectoryId ? [this.state.trajectoryId] : [],
    });
    this.notify(`session uploaded: #session/${meta.id}`);
    window.location.hash = `#session/${meta.id}`;
    await this.refreshSessions();
  }

  // -- structure / trajectory ------------------------------------------------

  loadStructureFile(name: string, text: string): void {
    this.structure = parsePdb(text);
    this.state.structureName = name;
    this.state.structurePdb = text;
    el<HTMLSpanElement>("structure-name").textContent = `${name} (${this.structure.nAtoms} atoms)`;
    this.redraw();
  }

  async registerTrajectory(): Promise<void> {
    this.api.setServer(this.targetServer());
    const url = el<HTMLInputElement>("traj-url").value.trim();
    if (!url) {
      this.notify("provide a URL to the trajectory file", true);
      return;
    }
    try {
      const record = await this.api.registerTrajectory({
        url,
        name: el<HTMLInputElement>("traj-name").value,
        description: el<HTMLInputElement>("traj-description").value,
        source: el<HTMLInputElement>("traj-source").value,
      });
      this.notify(`trajectory registered: ${record.id} (${record.n_frames} frames)`);
      await this.refreshTrajectories();
    } catch (err) {
      this.notify(`registration failed: ${(err as Error).message}`, true);
    }
  }

  async matchTrajectory(id?: string, opts?: { quiet?: boolean }): Promise<void> {
    const chosen = id ?? el<HTMLSelectElement>("traj-select").value;
    if (!chosen) return;
    this.api.setServer(this.targetServer());
    const meta = await this.api.getMeta(chosen);
    if (this.structure && this.structure.nAtoms !== meta.n_atoms) {
      // blocking dialog: the structure cannot interpret these frames
      window.alert(
        `Structure has ${this.structure.nAtoms} atoms but the trajectory has ` +
          `${meta.n_atoms}. Import a matching structure before streaming.`
      );
      return;
    }
    this.player?.dispose();
    this.player = new FramePlayer(this.api, chosen, meta.n_frames, (frame, index) => {
      this.currentFrame = frame;
      el<HTMLSpanElement>("frame-label").textContent =
        `frame ${index} / ${meta.n_frames - 1} (t = ${frame.timePs.toFixed(2)} ps)`;
      const slider = el<HTMLInputElement>("frame-slider");
      slider.max = String(meta.n_frames - 1);
      slider.value = String(index);
      this.state.frame = index;
      this.redraw();
    });
    this.state.trajectoryId = chosen;
    if (!opts?.quiet) this.notify(`matched trajectory ${meta.name || chosen}`);
    await this.player.show(Math.min(this.state.frame, meta.n_frames - 1));
  }

  async seek(frame: number): Promise<void> {
    if (!this.player) return;
    await this.player.seek(frame);
  }

  redraw(): void {
    if (!this.currentFrame) return;
    this.renderer.representation = this.state.representation;
    this.renderer.highlightedAtoms = this.state.measurements.flatMap((m) => m.atoms);
    this.renderer.draw(this.currentFrame.coords, this.structure, this.state.camera);
  }

  // -- measurements -----------------------------------------------------------

  addMeasurementFromForm(): void {
    const kind = el<HTMLSelectElement>("measure-kind").value as MeasurementEntry["kind"];
    const atomsText = el<HTMLInputElement>("measure-atoms").value.trim();
    const atoms = atomsText
      .split(/[\s,]+/)
      .filter((tok) => tok.length > 0)
      .map((tok) => parseInt(tok, 10));
    if (atoms.some((a) => Number.isNaN(a) || a < 0)) {
      this.notify("atom indices must be non-negative integers", true);
      return;
    }
    const arity: Record<string, number> = { distance: 2, angle: 3, dihedral: 4 };
    if (kind in arity && atoms.length !== arity[kind]) {
      this.notify(`${kind} needs ${arity[kind]} atom indices`, true);
      return;
    }
    const entry: MeasurementEntry = { kind, atoms };
    if (kind === "rmsd") {
      entry.referenceFrame = parseInt(el<HTMLInputElement>("rmsd-ref").value, 10) || 0;
      entry.superpose = true;
    }
    this.state.measurements.push(entry);
    this.renderMeasurementList();
    void this.showTrace(entry);
  }

  renderMeasurementList(): void {
    const list = el<HTMLUListElement>("measurement-list");
    list.innerHTML = "";
    this.state.measurements.forEach((m, i) => {
      const item = document.createElement("li");
      const label = document.createElement("span");
      label.textContent = `${m.kind}(${m.atoms.join(", ")})`;
      label.className = "measurement-label";
      label.addEventListener("click", () => void this.showTrace(m));
      const remove = document.createElement("button");
      remove.textContent = "x";
      remove.addEventListener("click", () => {
        this.state.measurements.splice(i, 1);
        this.renderMeasurementList();
      });
      item.appendChild(label);
      item.appendChild(remove);
      list.appendChild(item);
    });
    this.redraw();
  }

  async showTrace(entry: MeasurementEntry): Promise<void> {
    if (!this.state.trajectoryId) {
      this.notify("match a stream trajectory first", true);
      return;
    }
    const spec: TraceSpec = { kind: entry.kind, atoms: entry.atoms };
    if (entry.kind === "rmsd") {
      spec.reference_frame = entry.referenceFrame ?? 0;
      spec.superpose = entry.superpose ?? true;
      if (entry.atoms.length === 0 && this.structure) {
        spec.atoms = Array.from({ length: this.structure.nAtoms }, (_, i) => i);
      }
    }
    const sort = el<HTMLSelectElement>("trace-sort").value;
    if (sort !== "by_frame") spec.sort = sort as TraceSpec["sort"];
    const lo = el<HTMLInputElement>("trace-min").value;
    const hi = el<HTMLInputElement>("trace-max").value;
    if (lo !== "" && hi !== "") {
      spec.filter = { min: parseFloat(lo), max: parseFloat(hi) };
    }
    try {
      this.api.setServer(this.targetServer());
      this.currentTrace = await this.api.computeTrace(this.state.trajectoryId, spec);
      this.tracePlot.setTrace(this.currentTrace);
      this.notify("");
    } catch (err) {
      const detail = err instanceof ApiError ? err.message : String(err);
      this.notify(`trace failed: ${detail}`, true);
    }
  }

  // -- Zenodo ------------------------------------------------------------------

  zenodoFiles: RemoteFile[] = [];

  async zenodoLookup(): Promise<void> {
    const number = parseInt(el<HTMLInputElement>("zenodo-record").value, 10);
    const typeSelect = el<HTMLSelectElement>("zenodo-type");
    const fileSelect = el<HTMLSelectElement>("zenodo-file");
    typeSelect.innerHTML = "";
    fileSelect.innerHTML = "";
    try {
      this.zenodoFiles = await fetchRecord(number);
      for (const kind of availableKinds(this.zenodoFiles)) {
        const option = document.createElement("option");
        option.value = kind;
        option.textContent = kind;
        typeSelect.appendChild(option);
      }
      this.zenodoSelectType();
      this.notify(`record ${number}: ${this.zenodoFiles.length} files`);
    } catch (err) {
      if (err instanceof NoSupportedFilesError) {
        this.notify(`record ${number} has no supported files`, true);
      } else {
        this.notify(`Zenodo lookup failed: ${(err as Error).message}`, true);
      }
    }
  }

  zenodoSelectType(): void {
    const kind = el<HTMLSelectElement>("zenodo-type").value as RemoteFile["kind"];
    const fileSelect = el<HTMLSelectElement>("zenodo-file");
    fileSelect.innerHTML = "";
    for (const f of filterByType(this.zenodoFiles, kind)) {
      const option = document.createElement("option");
      option.value = f.downloadUrl;
      option.textContent = `${f.name} (${(f.size / 1024 / 1024).toFixed(1)} MiB)`;
      fileSelect.appendChild(option);
    }
  }

  async zenodoImport(): Promise<void> {
    const url = el<HTMLSelectElement>("zenodo-file").value;
    const kind = el<HTMLSelectElement>("zenodo-type").value;
    if (!url) return;
    if (kind === "trajectory") {
      el<HTMLInputElement>("traj-url").value = url;
      await this.registerTrajectory();
    } else if (kind === "structure") {
      const resp = await fetch(url);
      if (!resp.ok) {
        this.notify(`download failed: HTTP ${resp.status}`, true);
        return;
      }
      this.loadStructureFile(url.split("/").pop() ?? "structure.pdb", await resp.text());
    } else {
      // volumes and archives are fetched as plain downloads
      window.open(url, "_blank");
    }
  }

  // -- wiring --------------------------------------------------------------------

  bind(): void {
    el<HTMLButtonElement>("refresh-sessions").addEventListener("click", () =>
      void this.refreshSessions().catch((e) => this.notify(String(e), true))
    );
    el<HTMLButtonElement>("upload-session").addEventListener("click", () =>
      void this.uploadSession().catch((e) => this.notify(String(e), true))
    );
    el<HTMLButtonElement>("register-traj").addEventListener("click", () =>
      void this.registerTrajectory()
    );
    el<HTMLButtonElement>("match-traj").addEventListener("click", () =>
      void this.matchTrajectory().catch((e) => this.notify(String(e), true))
    );
    el<HTMLButtonElement>("play").addEventListener("click", () => {
      if (this.player) {
        this.player.fps = parseFloat(el<HTMLInputElement>("fps").value) || 10;
        this.player.play();
      }
    });
    el<HTMLButtonElement>("pause").addEventListener("click", () => this.player?.pause());
    el<HTMLInputElement>("frame-slider").addEventListener("change", (ev) => {
      const value = parseInt((ev.target as HTMLInputElement).value, 10);
      void this.seek(value);
    });
    el<HTMLSelectElement>("representation").addEventListener("change", (ev) => {
      this.state.representation = (ev.target as HTMLSelectElement).value as "spheres" | "lines";
      this.redraw();
    });
    el<HTMLInputElement>("structure-file").addEventListener("change", async (ev) => {
      const input = ev.target as HTMLInputElement;
      const file = input.files?.[0];
      if (file) this.loadStructureFile(file.name, await file.text());
    });
    el<HTMLButtonElement>("add-measurement").addEventListener("click", () =>
      this.addMeasurementFromForm()
    );
    el<HTMLButtonElement>("zenodo-lookup").addEventListener("click", () =>
      void this.zenodoLookup()
    );
    el<HTMLSelectElement>("zenodo-type").addEventListener("change", () =>
      this.zenodoSelectType()
    );
    el<HTMLButtonElement>("zenodo-import").addEventListener("click", () =>
      void this.zenodoImport()
    );
    for (const id of ["trace-sort", "trace-min", "trace-max"]) {
      el<HTMLElement>(id).addEventListener("change", () => {
        if (this.state.measurements.length > 0) {
          void this.showTrace(this.state.measurements[0]);
        }
      });
    }
    window.addEventListener("hashchange", () => void this.openSessionFromHash());

    // drag to rotate, wheel to zoom
    const canvas = el<HTMLCanvasElement>("view3d");
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    canvas.addEventListener("mousedown", (ev) => {
      dragging = true;
      lastX = ev.clientX;
      lastY = ev.clientY;
    });
    window.addEventListener("mouseup", () => (dragging = false));
    window.addEventListener("mousemove", (ev) => {
      if (!dragging) return;
      this.state.camera.rotY += (ev.clientX - lastX) * 0.01;
      this.state.camera.rotX += (ev.clientY - lastY) * 0.01;
      lastX = ev.clientX;
      lastY = ev.clientY;
      this.redraw();
    });
    canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.state.camera.zoom *= ev.deltaY < 0 ? 1.1 : 0.9;
      this.redraw();
    });
  }

  async start(): Promise<void> {
    this.bind();
    try {
      await this.refreshSessions();
      await this.refreshTrajectories();
    } catch (err) {
      this.notify(`server unreachable: ${(err as Error).message}`, true);
    }
    await this.openSessionFromHash();
  }
}
