import { describe, expect, it } from "vitest";

import { WIRE_HEADER_BYTES, decodeFrame, encodeFrame } from "../src/wire.js";

function handRolledPayload(): ArrayBuffer {
  // exact layout: f32 time, 9*f32 box, i32 n, 3n*f32 coords (little-endian)
  const buffer = new ArrayBuffer(4 * (1 + 9 + 1) + 24);
  const view = new DataView(buffer);
  view.setFloat32(0, 2.5, true);
  const box = [60, 0, 0, 0, 60, 0, 0, 0, 60];
  box.forEach((value, i) => view.setFloat32(4 + 4 * i, value, true));
  view.setInt32(40, 2, true);
  [1.5, -2.5, 3.0, 10.0, 20.0, 30.0].forEach((value, i) =>
    view.setFloat32(44 + 4 * i, value, true)
  );
  return buffer;
}

describe("decodeFrame", () => {
  it("decodes the documented little-endian layout", () => {
    const frame = decodeFrame(handRolledPayload());
    expect(frame.timePs).toBeCloseTo(2.5, 6);
    expect(frame.nAtoms).toBe(2);
    expect(Array.from(frame.box)).toEqual([60, 0, 0, 0, 60, 0, 0, 0, 60]);
    expect(Array.from(frame.coords)).toEqual([1.5, -2.5, 3, 10, 20, 30]);
  });

  it("two-atom payload is 68 bytes", () => {
    expect(handRolledPayload().byteLength).toBe(68);
    expect(WIRE_HEADER_BYTES + 2 * 12).toBe(68);
  });

  it("round-trips through the test encoder", () => {
    const payload = encodeFrame(7.25, new Array(9).fill(1), [0.5, 1.5, 2.5]);
    const frame = decodeFrame(payload);
    expect(frame.timePs).toBe(7.25);
    expect(frame.nAtoms).toBe(1);
    expect(Array.from(frame.coords)).toEqual([0.5, 1.5, 2.5]);
  });

  it("rejects truncated payloads", () => {
    expect(() => decodeFrame(new ArrayBuffer(10))).toThrow(/too short/);
    const short = handRolledPayload().slice(0, 50);
    expect(() => decodeFrame(short)).toThrow(/claims 2 atoms/);
  });
});
