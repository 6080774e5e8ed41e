/**
 * Binary frame payload decoding (wire version 1).
 *
 * Little-endian: float32 time_ps, nine float32 box values (Angstrom,
 * row-major), int32 coordinate count, then 3*n float32 coordinates.
 */

export const WIRE_VERSION = "1";
export const WIRE_HEADER_BYTES = 4 * (1 + 9 + 1);

export interface DecodedFrame {
  timePs: number;
  box: Float32Array; // 9 values, row-major
  coords: Float32Array; // 3 * nAtoms
  nAtoms: number;
}

export function decodeFrame(payload: ArrayBuffer): DecodedFrame {
  if (payload.byteLength < WIRE_HEADER_BYTES) {
    throw new Error(`frame payload of ${payload.byteLength} bytes is too short`);
  }
  const view = new DataView(payload);
  const timePs = view.getFloat32(0, true);
  const box = new Float32Array(9);
  for (let i = 0; i < 9; i++) {
    box[i] = view.getFloat32(4 + 4 * i, true);
  }
  const nAtoms = view.getInt32(40, true);
  const expected = WIRE_HEADER_BYTES + 12 * nAtoms;
  if (nAtoms < 0 || payload.byteLength < expected) {
    throw new Error(
      `frame payload claims ${nAtoms} atoms but holds ${payload.byteLength} bytes`
    );
  }
  // slice: payloads may arrive inside a larger buffer with an offset
  const coords = new Float32Array(payload.slice(WIRE_HEADER_BYTES, expected));
  return { timePs, box, coords, nAtoms };
}

/** Test helper: the inverse of decodeFrame. */
export function encodeFrame(
  timePs: number,
  box: ArrayLike<number>,
  coords: ArrayLike<number>
): ArrayBuffer {
  const nAtoms = Math.floor(coords.length / 3);
  const buffer = new ArrayBuffer(WIRE_HEADER_BYTES + 12 * nAtoms);
  const view = new DataView(buffer);
  view.setFloat32(0, timePs, true);
  for (let i = 0; i < 9; i++) {
    view.setFloat32(4 + 4 * i, box[i] ?? 0, true);
  }
  view.setInt32(40, nAtoms, true);
  for (let i = 0; i < 3 * nAtoms; i++) {
    view.setFloat32(WIRE_HEADER_BYTES + 4 * i, coords[i], true);
  }
  return buffer;
}
