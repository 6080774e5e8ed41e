import { describe, expect, it } from "vitest";

import {
  NoSupportedFilesError,
  availableKinds,
  classify,
  fetchRecord,
  filterByType,
} from "../src/zenodo.js";

function fakeFetch(status: number, payload?: unknown) {
  return async () => ({
    ok: status >= 200 && status < 300,
    status,
    json: async () => payload,
    arrayBuffer: async () => new ArrayBuffer(0),
  });
}

const RECORD = {
  files: [
    { key: "run1.xtc", size: 100, links: { self: "https://z/run1.xtc" } },
    { key: "topol.pdb", size: 10, links: { self: "https://z/topol.pdb" } },
    { key: "notes.txt", size: 1, links: { self: "https://z/notes.txt" } },
    { key: "scripts.tar.gz", size: 5, links: { self: "https://z/scripts.tar.gz" } },
  ],
};

describe("classify", () => {
  it.each([
    ["a.pdb", "structure"],
    ["a.cif", "structure"],
    ["a.gro", "structure"],
    ["a.xtc", "trajectory"],
    ["a.dcd", "trajectory"],
    ["a.trr", "trajectory"],
    ["a.mrc", "volume"],
    ["a.ccp4", "volume"],
    ["a.dx", "volume"],
    ["a.zip", "compressed"],
    ["a.gz", "compressed"],
    ["a.tar.gz", "compressed"],
    ["A.XTC", "trajectory"],
    ["whatever.txt", "unsupported"],
  ])("%s -> %s", (name, kind) => {
    expect(classify(name)).toBe(kind);
  });
});

describe("fetchRecord", () => {
  it("lists and classifies record files", async () => {
    const files = await fetchRecord(123, fakeFetch(200, RECORD));
    expect(files.map((f) => f.kind)).toEqual([
      "trajectory",
      "structure",
      "unsupported",
      "compressed",
    ]);
    expect(files[0].downloadUrl).toBe("https://z/run1.xtc");
  });

  it("notifies when no file is supported", async () => {
    const payload = { files: [{ key: "a.txt", links: { self: "u" } }] };
    await expect(fetchRecord(7, fakeFetch(200, payload))).rejects.toThrow(
      NoSupportedFilesError
    );
    await expect(fetchRecord(7, fakeFetch(200, payload))).rejects.toThrow(
      /no supported files/
    );
  });

  it("maps 404 and junk to clear errors", async () => {
    await expect(fetchRecord(9, fakeFetch(404))).rejects.toThrow(/not found/);
    await expect(fetchRecord(9, fakeFetch(200, {}))).rejects.toThrow(/files array/);
    await expect(fetchRecord(0, fakeFetch(200, RECORD))).rejects.toThrow(/positive/);
  });
});

describe("dropdown helpers", () => {
  it("filterByType preserves order within a kind", async () => {
    const files = await fetchRecord(123, fakeFetch(200, RECORD));
    expect(filterByType(files, "trajectory").map((f) => f.name)).toEqual(["run1.xtc"]);
    expect(filterByType(files, "volume")).toEqual([]);
  });

  it("availableKinds lists present kinds in dropdown order", async () => {
    const files = await fetchRecord(123, fakeFetch(200, RECORD));
    expect(availableKinds(files)).toEqual(["structure", "trajectory", "compressed"]);
  });
});
