import { ArtifactError, Table, column, requireColumns } from "./csv.js";
import { logLogFit } from "./fit.js";
import {
  AXIS, Box, GRID, Item, PALETTE, Scene, fmtNum, makeFrame,
} from "./scene.js";
import { FigureSpec } from "./spec.js";

export interface CheckEntry {
  name: string;
  value: number | null;
  bound: number;
  ok: boolean;
}

export interface ChecksReport {
  checks: CheckEntry[];
  ok: boolean;
}

export type ArtifactInput =
  | { kind: "table"; path: string; table: Table }
  | { kind: "checks"; path: string; report: ChecksReport };

const W = 640;
const H = 420;
const BOX: Box = { x0: 64, y0: 36, x1: W - 16, y1: H - 46 };

function tables(inputs: ArtifactInput[]): Table[] {
  const out: Table[] = [];
  for (const inp of inputs) {
    if (inp.kind !== "table") {
      throw new ArtifactError(`${inp.path} is not a CSV artifact`);
    }
    if (inp.table.rows.length === 0) {
      throw new ArtifactError(`${inp.path}: empty series`);
    }
    out.push(inp.table);
  }
  return out;
}

function pickDefault(header: string[], not: string, cap = 6): string[] {
  return header.filter((h) => h !== not).slice(0, cap);
}

function seriesRange(
  vals: number[][], scale: "linear" | "log",
): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const vs of vals) {
    for (const v of vs) {
      if (!isFinite(v)) continue;
      if (scale === "log" && v <= 0) continue;
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!(hi >= lo)) throw new ArtifactError("empty series");
  return [lo, hi];
}

function title(items: Item[], text: string, width = W): void {
  items.push({ type: "text", x: width / 2, y: 20, text, size: 13,
               anchor: "middle", fill: AXIS });
}

function timeseries(spec: FigureSpec, inputs: ArtifactInput[]): Scene {
  const ts = tables(inputs);
  const xcol = spec.x ?? (ts[0].header.includes("t") ? "t" : ts[0].header[0]);
  const ycols = spec.y ?? pickDefault(ts[0].header, xcol);
  for (const t of ts) requireColumns(t, [xcol, ...ycols]);
  const xscale = spec.xscale ?? "linear";
  const yscale = spec.yscale ?? "linear";
  const xs = ts.map((t) => column(t, xcol));
  const all = ts.flatMap((t) => ycols.map((c) => column(t, c)));
  const fr = makeFrame(BOX, seriesRange(xs, xscale), xscale, xcol,
                       seriesRange(all, yscale), yscale,
                       ycols.length === 1 ? ycols[0] : "");
  const items = [...fr.items];
  title(items, spec.title ?? `time series: ${ycols.join(", ")}`);
  let k = 0;
  for (let i = 0; i < ts.length; i++) {
    for (const c of ycols) {
      const ys = column(ts[i], c);
      const pts: [number, number][] = [];
      for (let j = 0; j < ys.length; j++) {
        if (!isFinite(ys[j]) || (yscale === "log" && ys[j] <= 0)) continue;
        if (xscale === "log" && xs[i][j] <= 0) continue;
        pts.push([fr.px(xs[i][j]), fr.py(ys[j])]);
      }
      if (pts.length === 0) {
        throw new ArtifactError(`column "${c}" has no drawable points`);
      }
      const color = PALETTE[k % PALETTE.length];
      items.push({ type: "polyline", points: pts, stroke: color, width: 1.5 });
      items.push({ type: "text", x: BOX.x1 - 6, y: BOX.y0 + 16 + 14 * k,
                   text: ts.length > 1 ? `run${i}:${c}` : c, size: 11,
                   anchor: "end", fill: color });
      k += 1;
    }
  }
  return { width: W, height: H, items };
}

function trajectory(spec: FigureSpec, inputs: ArtifactInput[]): Scene {
  const ts = tables(inputs);
  let xcol = spec.x;
  let ycol = spec.y?.[0];
  if (!xcol || !ycol) {
    const h = ts[0].header;
    if (h.includes("zeta_1")) [xcol, ycol] = ["zeta_1", "zeta_2"];
    else if (h.includes("z1")) [xcol, ycol] = ["z1", "z2"];
    else throw new ArtifactError("no center columns found; set x and y");
  }
  for (const t of ts) requireColumns(t, [xcol, ycol]);
  const side = 420;
  const box: Box = { x0: 56, y0: 36, x1: 56 + side - 72, y1: 36 + side - 72 };
  const fr = makeFrame(box, [-1.1, 1.1], "linear", xcol,
                       [-1.1, 1.1], "linear", ycol);
  const items = [...fr.items];
  const circle: [number, number][] = [];
  for (let i = 0; i <= 128; i++) {
    const a = (2 * Math.PI * i) / 128;
    circle.push([fr.px(Math.cos(a)), fr.py(Math.sin(a))]);
  }
  items.push({ type: "polyline", points: circle, stroke: GRID, width: 1.5 });
  for (let i = 0; i < ts.length; i++) {
    const xs = column(ts[i], xcol);
    const ys = column(ts[i], ycol);
    const pts = xs.map((x, j) => [fr.px(x), fr.py(ys[j])] as [number, number]);
    const color = PALETTE[i % PALETTE.length];
    items.push({ type: "polyline", points: pts, stroke: color, width: 1.5 });
    items.push({ type: "circle", cx: pts[0][0], cy: pts[0][1], r: 4,
                 stroke: color, fill: "none" });
    items.push({ type: "circle", cx: pts[pts.length - 1][0],
                 cy: pts[pts.length - 1][1], r: 3, stroke: color,
                 fill: color });
    const n = xs.length - 1;
    items.push({ type: "text", x: box.x0 + 6, y: box.y1 - 20 - 14 * i,
                 text: `start (${fmtNum(xs[0])}, ${fmtNum(ys[0])})  end `
                   + `(${fmtNum(xs[n])}, ${fmtNum(ys[n])})`,
                 size: 11, anchor: "start", fill: color });
  }
  title(items, spec.title ?? "center path in the unit ball", side);
  return { width: side, height: side, items };
}

function scaling(spec: FigureSpec, inputs: ArtifactInput[]): Scene {
  const ts = tables(inputs);
  const xcol = spec.x ?? "r";
  const ycols = spec.y ?? pickDefault(ts[0].header, xcol, 3);
  for (const t of ts) requireColumns(t, [xcol, ...ycols]);
  const xscale = spec.xscale ?? "log";
  const yscale = spec.yscale ?? "log";
  const xs = ts.map((t) => column(t, xcol));
  const all = ts.flatMap((t) => ycols.map((c) => column(t, c)));
  const fr = makeFrame(BOX, seriesRange(xs, xscale), xscale, xcol,
                       seriesRange(all, yscale), yscale, "");
  const items = [...fr.items];
  title(items, spec.title ?? `scaling: ${ycols.join(", ")} vs ${xcol}`);
  let k = 0;
  for (let i = 0; i < ts.length; i++) {
    for (const c of ycols) {
      const ys = column(ts[i], c);
      const color = PALETTE[k % PALETTE.length];
      const drawable: [number, number][] = [];
      for (let j = 0; j < ys.length; j++) {
        if (xs[i][j] > 0 && ys[j] > 0 && isFinite(ys[j])) {
          drawable.push([xs[i][j], ys[j]]);
        }
      }
      if (drawable.length === 0) {
        throw new ArtifactError(`column "${c}" has no drawable points`);
      }
      for (const [x, y] of drawable) {
        items.push({ type: "circle", cx: fr.px(x), cy: fr.py(y), r: 3,
                     stroke: color, fill: color });
      }
      const fit = logLogFit(xs[i], ys);
      let label = `${c}: slope n/a`;
      if (fit) {
        const x0 = drawable[0][0];
        const x1 = drawable[drawable.length - 1][0];
        const yAt = (x: number) =>
          Math.exp(fit.intercept + fit.slope * Math.log(x));
        items.push({ type: "line", x1: fr.px(x0), y1: fr.py(yAt(x0)),
                     x2: fr.px(x1), y2: fr.py(yAt(x1)), stroke: color,
                     width: 1 });
        label = `${c}: slope ${fit.slope.toPrecision(9)}`;
        if (fit.n > 2) label += ` +/- ${fit.ci95.toPrecision(3)}`;
      }
      items.push({ type: "text", x: BOX.x0 + 8, y: BOX.y0 + 16 + 14 * k,
                   text: label, size: 11, anchor: "start", fill: color });
      k += 1;
    }
  }
  return { width: W, height: H, items };
}

const FLOOR = 1e-18;

function checks(spec: FigureSpec, inputs: ArtifactInput[]): Scene {
  const inp = inputs[0];
  if (inp.kind !== "checks") {
    throw new ArtifactError(`${inp.path} is not a verification summary`);
  }
  const rep = inp.report;
  if (rep.checks.length === 0) throw new ArtifactError("empty check list");
  const rowH = 24;
  const height = 80 + rowH * rep.checks.length;
  const box: Box = { x0: 190, y0: 36, x1: W - 24, y1: height - 40 };
  const mags = rep.checks.flatMap((c) => [
    Math.max(Math.abs(c.value ?? NaN), FLOOR) || FLOOR,
    Math.max(Math.abs(c.bound), FLOOR),
  ]).filter((v) => isFinite(v));
  const lo = Math.min(...mags) / 10;
  const hi = Math.max(...mags) * 10;
  const fr = makeFrame(box, [lo, hi], "log", "|value| against bound",
                       [0, rep.checks.length], "linear", "");
  // drop the linear y ticks; rows are labeled by name instead
  const items = fr.items.filter(
    (it) => !(it.type === "text" && it.anchor === "end")
      && !(it.type === "line" && it.x1 === box.x0 - 4),
  );
  title(items, spec.title
    ?? `verification checks: ${rep.ok ? "all passed" : "FAILURES"}`);
  rep.checks.forEach((c, i) => {
    const y = fr.py(i + 0.5);
    const color = c.ok ? PALETTE[2] : PALETTE[1];
    const bx = fr.px(Math.max(Math.abs(c.bound), FLOOR));
    const vx = fr.px(Math.max(Math.abs(c.value ?? NaN), FLOOR) || FLOOR);
    items.push({ type: "text", x: box.x0 - 8, y: y + 4, text: c.name,
                 size: 11, anchor: "end", fill: AXIS });
    items.push({ type: "line", x1: bx, y1: y - 7, x2: bx, y2: y + 7,
                 stroke: AXIS, width: 2 });
    items.push({ type: "circle", cx: vx, cy: y, r: 4, stroke: color,
                 fill: color });
  });
  return { width: W, height, items };
}

export function buildFigure(spec: FigureSpec, inputs: ArtifactInput[]): Scene {
  if (inputs.length === 0) throw new ArtifactError("no inputs");
  switch (spec.kind) {
    case "timeseries":
      return timeseries(spec, inputs);
    case "trajectory":
      return trajectory(spec, inputs);
    case "scaling":
      return scaling(spec, inputs);
    case "checks":
      return checks(spec, inputs);
  }
}
