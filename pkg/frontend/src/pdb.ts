/**
 * Minimal client-side PDB reader: enough to colour atoms by element and to
 * check that an imported structure matches the streamed trajectory.
 * First model only; alternate locations other than ' '/'A' are skipped.
 */

export interface ClientAtom {
  serial: number;
  name: string;
  element: string;
  resName: string;
  chainId: string;
  resSeq: number;
  x: number;
  y: number;
  z: number;
}

export interface ClientStructure {
  atoms: ClientAtom[];
  nAtoms: number;
}

export function parsePdb(text: string): ClientStructure {
  const atoms: ClientAtom[] = [];
  for (const line of text.split(/\r?\n/)) {
    const record = line.slice(0, 6);
    if (record === "ENDMDL" || line.trimEnd() === "END") break;
    if (record !== "ATOM  " && record !== "HETATM") continue;
    if (line.length < 54) {
      throw new Error(`ATOM record too short: ${line}`);
    }
    const altLoc = line[16];
    if (altLoc !== " " && altLoc !== "A") continue;
    const name = line.slice(12, 16).trim();
    let element = line.slice(76, 78).trim();
    if (!element) {
      // old files leave the element columns blank; fall back to the name
      element = name.replace(/[0-9]/g, "").slice(0, 1);
    }
    atoms.push({
      serial: parseInt(line.slice(6, 11), 10),
      name,
      element,
      resName: line.slice(17, 20).trim(),
      chainId: line[21],
      resSeq: parseInt(line.slice(22, 26), 10),
      x: parseFloat(line.slice(30, 38)),
      y: parseFloat(line.slice(38, 46)),
      z: parseFloat(line.slice(46, 54)),
    });
  }
  if (atoms.length === 0) {
    throw new Error("no ATOM/HETATM records in structure file");
  }
  return { atoms, nAtoms: atoms.length };
}
