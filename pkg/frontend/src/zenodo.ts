/**
 * Zenodo import panel logic: list a record's files, classify them by
 * extension and group them behind a type dropdown. A record without any
 * supported file raises a typed notice that the interface shows as a banner.
 */

import { FetchLike } from "./api.js";

export type RemoteKind = "structure" | "trajectory" | "volume" | "compressed" | "unsupported";

export interface RemoteFile {
  name: string;
  downloadUrl: string;
  size: number;
  kind: RemoteKind;
}

const EXTENSION_KINDS: Array<[string, RemoteKind]> = [
  [".tar.gz", "compressed"],
  [".ccp4", "volume"],
  [".pdb", "structure"],
  [".cif", "structure"],
  [".gro", "structure"],
  [".xtc", "trajectory"],
  [".dcd", "trajectory"],
  [".trr", "trajectory"],
  [".mrc", "volume"],
  [".zip", "compressed"],
  [".dx", "volume"],
  [".gz", "compressed"],
];

export function classify(name: string): RemoteKind {
  const lowered = name.toLowerCase();
  let best: RemoteKind = "unsupported";
  let bestLen = 0;
  for (const [ext, kind] of EXTENSION_KINDS) {
    if (lowered.endsWith(ext) && ext.length > bestLen) {
      best = kind;
      bestLen = ext.length;
    }
  }
  return best;
}

export class NoSupportedFilesError extends Error {
  constructor(public recordNumber: number, public files: RemoteFile[]) {
    super(`no supported files in record ${recordNumber}`);
  }
}

export async function fetchRecord(
  recordNumber: number,
  fetchImpl: FetchLike = (url, init) => fetch(url, init),
  apiBase = "https://zenodo.org/api/records"
): Promise<RemoteFile[]> {
  if (!Number.isInteger(recordNumber) || recordNumber <= 0) {
    throw new Error(`record number must be a positive integer, got ${recordNumber}`);
  }
  const resp = await fetchImpl(`${apiBase}/${recordNumber}`);
  if (resp.status === 404) {
    throw new Error(`Zenodo record ${recordNumber} not found`);
  }
  if (!resp.ok) {
    throw new Error(`Zenodo returned HTTP ${resp.status}`);
  }
  const body = (await resp.json()) as {
    files?: Array<{ key: string; size?: number; links?: { self?: string } }>;
  };
  if (!body || !Array.isArray(body.files)) {
    throw new Error("Zenodo response lacks a files array");
  }
  const files = body.files.map((entry) => ({
    name: entry.key,
    downloadUrl: entry.links?.self ?? "",
    size: entry.size ?? 0,
    kind: classify(entry.key),
  }));
  if (files.length === 0 || files.every((f) => f.kind === "unsupported")) {
    throw new NoSupportedFilesError(recordNumber, files);
  }
  return files;
}

export function filterByType(files: RemoteFile[], kind: RemoteKind): RemoteFile[] {
  return files.filter((f) => f.kind === kind);
}

/** Kinds present in a record, in dropdown order. */
export function availableKinds(files: RemoteFile[]): RemoteKind[] {
  const order: RemoteKind[] = ["structure", "trajectory", "volume", "compressed"];
  return order.filter((kind) => files.some((f) => f.kind === kind));
}
