import { readFileSync } from "node:fs";

export interface Table {
  header: string[];
  rows: number[][];
}

export class ArtifactError extends Error {}

function parseField(field: string): number {
  const s = field.trim();
  if (s === "") return NaN;
  if (s === "inf") return Infinity;
  if (s === "-inf") return -Infinity;
  return Number(s);
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length < 1) throw new ArtifactError("empty CSV");
  const header = lines[0].split(",").map((h) => h.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split(",");
    if (fields.length !== header.length) {
      throw new ArtifactError(
        `row ${i} has ${fields.length} fields, header has ${header.length}`,
      );
    }
    rows.push(fields.map(parseField));
  }
  return { header, rows };
}

export function readTable(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new ArtifactError(`cannot read ${path}`);
  }
  return parseCsv(text);
}

export function column(table: Table, name: string): number[] {
  const j = table.header.indexOf(name);
  if (j < 0) {
    throw new ArtifactError(
      `missing column "${name}" (have: ${table.header.join(", ")})`,
    );
  }
  return table.rows.map((r) => r[j]);
}

export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.header.includes(name)) {
      throw new ArtifactError(
        `missing column "${name}" (have: ${table.header.join(", ")})`,
      );
    }
  }
}
