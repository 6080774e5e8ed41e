/**
 * Session state: everything needed to restore a prepared view.
 *
 * Serialization is canonical (fixed key order), so serializing, uploading,
 * downloading and re-serializing a session yields byte-identical text.
 */

export interface CameraState {
  rotX: number;
  rotY: number;
  zoom: number;
  panX: number;
  panY: number;
}

export interface MeasurementEntry {
  kind: "distance" | "angle" | "dihedral" | "rmsd";
  atoms: number[];
  referenceFrame?: number;
  superpose?: boolean;
}

export interface SessionState {
  version: 1;
  trajectoryId: string | null;
  structureName: string | null;
  structurePdb: string | null; // the client-side structure travels with the session
  frame: number;
  representation: "spheres" | "lines";
  camera: CameraState;
  measurements: MeasurementEntry[];
}

export function emptySession(): SessionState {
  return {
    version: 1,
    trajectoryId: null,
    structureName: null,
    structurePdb: null,
    frame: 0,
    representation: "spheres",
    camera: { rotX: 0, rotY: 0, zoom: 1, panX: 0, panY: 0 },
    measurements: [],
  };
}

/** Canonical serialization: explicit field order, no whitespace. */
export function serializeSession(s: SessionState): string {
  const measurements = s.measurements.map((m) => {
    const entry: Record<string, unknown> = { kind: m.kind, atoms: m.atoms };
    if (m.kind === "rmsd") {
      entry.referenceFrame = m.referenceFrame ?? 0;
      entry.superpose = m.superpose ?? true;
    }
    return entry;
  });
  return JSON.stringify({
    version: s.version,
    trajectoryId: s.trajectoryId,
    structureName: s.structureName,
    structurePdb: s.structurePdb,
    frame: s.frame,
    representation: s.representation,
    camera: {
      rotX: s.camera.rotX,
      rotY: s.camera.rotY,
      zoom: s.camera.zoom,
      panX: s.camera.panX,
      panY: s.camera.panY,
    },
    measurements,
  });
}

export function deserializeSession(text: string): SessionState {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new Error("session state is not valid JSON");
  }
  const obj = raw as Partial<SessionState> & { camera?: Partial<CameraState> };
  if (obj.version !== 1) {
    throw new Error(`unsupported session state version ${String(obj.version)}`);
  }
  const base = emptySession();
  return {
    version: 1,
    trajectoryId: obj.trajectoryId ?? null,
    structureName: obj.structureName ?? null,
    structurePdb: obj.structurePdb ?? null,
    frame: typeof obj.frame === "number" ? obj.frame : 0,
    representation: obj.representation === "lines" ? "lines" : "spheres",
    camera: { ...base.camera, ...(obj.camera ?? {}) },
    measurements: Array.isArray(obj.measurements)
      ? obj.measurements.map((m) => ({
          kind: m.kind,
          atoms: [...m.atoms],
          ...(m.kind === "rmsd"
            ? { referenceFrame: m.referenceFrame ?? 0, superpose: m.superpose ?? true }
            : {}),
        }))
      : [],
  };
}
