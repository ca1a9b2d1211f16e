export type Item =
  | { type: "line"; x1: number; y1: number; x2: number; y2: number;
      stroke: string; width: number }
  | { type: "polyline"; points: [number, number][]; stroke: string;
      width: number }
  | { type: "circle"; cx: number; cy: number; r: number; stroke: string;
      fill: string }
  | { type: "rect"; x: number; y: number; w: number; h: number;
      stroke: string; fill: string }
  | { type: "text"; x: number; y: number; text: string; size: number;
      anchor: "start" | "middle" | "end"; fill: string };

export interface Scene {
  width: number;
  height: number;
  items: Item[];
}

export type Scale = "linear" | "log";

export const PALETTE = [
  "#1f6feb", "#d1242f", "#2da44e", "#9a6700", "#8250df", "#57606a",
];
export const AXIS = "#24292f";
export const GRID = "#d0d7de";

export interface Box {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export function fmtNum(v: number): string {
  if (!isFinite(v)) return String(v);
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(0).replace("e+", "e").replace("e-", "e-");
  }
  // strip trailing zeros of a fixed rendering
  return String(parseFloat(v.toPrecision(6)));
}

function linearTicks(lo: number, hi: number, target = 5): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10) * mag;
  const out: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * step;
       t += step) {
    out.push(Math.abs(t) < 1e-12 * step ? 0 : t);
  }
  return out;
}

function logTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  const e0 = Math.ceil(Math.log10(lo) - 1e-9);
  const e1 = Math.floor(Math.log10(hi) + 1e-9);
  let stride = 1;
  while ((e1 - e0) / stride > 8) stride += 1;
  for (let e = e0; e <= e1; e += stride) out.push(Math.pow(10, e));
  return out.length >= 2 ? out : [lo, hi];
}

export interface Frame {
  px: (v: number) => number;
  py: (v: number) => number;
  items: Item[];
}

/** Axis frame with ticks and labels; returns data-to-pixel mappings.
 * Log axes require positive ranges (caller clamps its data first). */
export function makeFrame(
  box: Box,
  xr: [number, number], xs: Scale, xlabel: string,
  yr: [number, number], ys: Scale, ylabel: string,
): Frame {
  let [xlo, xhi] = xr;
  let [ylo, yhi] = yr;
  if (xs === "linear" && xhi === xlo) { xlo -= 1; xhi += 1; }
  if (ys === "linear" && yhi === ylo) { ylo -= 1; yhi += 1; }
  if (xs === "log" && xhi / xlo < 1.0001) { xlo /= 2; xhi *= 2; }
  if (ys === "log" && yhi / ylo < 1.0001) { ylo /= 2; yhi *= 2; }
  const fx = (v: number) => (xs === "log" ? Math.log(v) : v);
  const fy = (v: number) => (ys === "log" ? Math.log(v) : v);
  const sx = (box.x1 - box.x0) / (fx(xhi) - fx(xlo));
  const sy = (box.y1 - box.y0) / (fy(yhi) - fy(ylo));
  const px = (v: number) => box.x0 + (fx(v) - fx(xlo)) * sx;
  const py = (v: number) => box.y1 - (fy(v) - fy(ylo)) * sy;

  const items: Item[] = [];
  items.push({ type: "rect", x: box.x0, y: box.y0, w: box.x1 - box.x0,
               h: box.y1 - box.y0, stroke: AXIS, fill: "none" });
  const xticks = xs === "log" ? logTicks(xlo, xhi) : linearTicks(xlo, xhi);
  const yticks = ys === "log" ? logTicks(ylo, yhi) : linearTicks(ylo, yhi);
  for (const t of xticks) {
    if (t < xlo || t > xhi) continue;
    const x = px(t);
    items.push({ type: "line", x1: x, y1: box.y0, x2: x, y2: box.y1,
                 stroke: GRID, width: 1 });
    items.push({ type: "line", x1: x, y1: box.y1, x2: x, y2: box.y1 + 4,
                 stroke: AXIS, width: 1 });
    items.push({ type: "text", x, y: box.y1 + 16, text: fmtNum(t), size: 11,
                 anchor: "middle", fill: AXIS });
  }
  for (const t of yticks) {
    if (t < ylo || t > yhi) continue;
    const y = py(t);
    items.push({ type: "line", x1: box.x0, y1: y, x2: box.x1, y2: y,
                 stroke: GRID, width: 1 });
    items.push({ type: "line", x1: box.x0 - 4, y1: y, x2: box.x0, y2: y,
                 stroke: AXIS, width: 1 });
    items.push({ type: "text", x: box.x0 - 6, y: y + 4, text: fmtNum(t),
                 size: 11, anchor: "end", fill: AXIS });
  }
  if (xlabel) {
    items.push({ type: "text", x: (box.x0 + box.x1) / 2, y: box.y1 + 32,
                 text: xlabel, size: 12, anchor: "middle", fill: AXIS });
  }
  if (ylabel) {
    items.push({ type: "text", x: box.x0, y: box.y0 - 8, text: ylabel,
                 size: 12, anchor: "start", fill: AXIS });
  }
  return { px, py, items };
}
