export type FigureKind = "timeseries" | "trajectory" | "scaling" | "checks";

const KINDS: FigureKind[] = ["timeseries", "trajectory", "scaling", "checks"];

export interface FigureSpec {
  kind: FigureKind;
  /** Artifact paths; resolved relative to the spec file's directory. */
  inputs: string[];
  /** x column; per-kind default when omitted. */
  x?: string;
  /** series columns; per-kind default when omitted. */
  y?: string[];
  xscale?: "linear" | "log";
  yscale?: "linear" | "log";
  title?: string;
  /** Output image paths; extension selects SVG or PNG. */
  out: string[];
}

export class SpecError extends Error {}

function isStringArray(v: unknown): v is string[] {
  return Array.isArray(v) && v.every((s) => typeof s === "string");
}

export function validateSpec(raw: unknown): FigureSpec {
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new SpecError("figure spec must be a JSON object");
  }
  const o = raw as Record<string, unknown>;
  if (!KINDS.includes(o.kind as FigureKind)) {
    throw new SpecError(
      `kind must be one of ${KINDS.join(" | ")}, got ${JSON.stringify(o.kind)}`,
    );
  }
  if (!isStringArray(o.inputs) || o.inputs.length === 0) {
    throw new SpecError("inputs must be a non-empty array of paths");
  }
  if (!isStringArray(o.out) || o.out.length === 0) {
    throw new SpecError("out must be a non-empty array of image paths");
  }
  for (const p of o.out) {
    if (!p.endsWith(".svg") && !p.endsWith(".png")) {
      throw new SpecError(`output ${p} must end in .svg or .png`);
    }
  }
  if (o.x !== undefined && typeof o.x !== "string") {
    throw new SpecError("x must be a column name");
  }
  if (o.y !== undefined && !isStringArray(o.y)) {
    throw new SpecError("y must be an array of column names");
  }
  for (const key of ["xscale", "yscale"] as const) {
    const v = o[key];
    if (v !== undefined && v !== "linear" && v !== "log") {
      throw new SpecError(`${key} must be "linear" or "log"`);
    }
  }
  if (o.title !== undefined && typeof o.title !== "string") {
    throw new SpecError("title must be a string");
  }
  return {
    kind: o.kind as FigureKind,
    inputs: o.inputs,
    x: o.x as string | undefined,
    y: o.y as string[] | undefined,
    xscale: o.xscale as "linear" | "log" | undefined,
    yscale: o.yscale as "linear" | "log" | undefined,
    title: o.title as string | undefined,
    out: o.out,
  };
}
