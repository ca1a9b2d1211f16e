#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";
import { dirname, extname, resolve } from "node:path";
import { pathToFileURL } from "node:url";
import { ArtifactError, readTable } from "./csv.js";
import { SpecError, validateSpec } from "./spec.js";
import {
  ArtifactInput,
  ChecksReport,
  buildFigure,
} from "./figures.js";
import { sceneToSvg } from "./svg.js";
import { sceneToPng } from "./raster.js";

const USAGE = "usage: plots render --spec FILE";

function loadChecks(path: string): ChecksReport {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new ArtifactError(`${path}: ${(err as Error).message}`);
  }
  const o = raw as { checks?: unknown; ok?: unknown };
  if (typeof o !== "object" || o === null || !Array.isArray(o.checks)) {
    throw new ArtifactError(`${path}: not a checks report`);
  }
  for (const c of o.checks) {
    const e = c as Record<string, unknown>;
    if (
      typeof e.name !== "string" ||
      (typeof e.value !== "number" && e.value !== null) ||
      typeof e.bound !== "number" ||
      typeof e.ok !== "boolean"
    ) {
      throw new ArtifactError(`${path}: malformed check entry`);
    }
  }
  return { checks: o.checks, ok: Boolean(o.ok) } as ChecksReport;
}

function loadInput(path: string): ArtifactInput {
  if (extname(path) === ".json") {
    return { kind: "checks", path, report: loadChecks(path) };
  }
  return { kind: "table", path, table: readTable(path) };
}

export function main(argv: string[]): number {
  if (argv.length !== 3 || argv[0] !== "render" || argv[1] !== "--spec") {
    process.stderr.write(USAGE + "\n");
    return 2;
  }
  const specPath = argv[2];
  try {
    let raw: unknown;
    try {
      raw = JSON.parse(readFileSync(specPath, "utf8"));
    } catch (err) {
      throw new SpecError(`${specPath}: ${(err as Error).message}`);
    }
    const spec = validateSpec(raw);
    const base = dirname(resolve(specPath));
    const inputs = spec.inputs.map((p) => loadInput(resolve(base, p)));
    const scene = buildFigure(spec, inputs);
    for (const out of spec.out) {
      const target = resolve(base, out);
      if (out.endsWith(".svg")) {
        writeFileSync(target, sceneToSvg(scene));
      } else {
        writeFileSync(target, sceneToPng(scene));
      }
      process.stdout.write(target + "\n");
    }
    return 0;
  } catch (err) {
    if (err instanceof SpecError || err instanceof ArtifactError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 2;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
