/** CPU rasterizer for Scene items; no anti-aliasing so output bytes are
 * stable across platforms. */
import { Item, Scene } from "./scene.js";
import { ADVANCE, glyph } from "./font.js";
import { encodePng } from "./png.js";

type Rgb = [number, number, number];

function parseColor(c: string): Rgb | null {
  if (c === "none") return null;
  const m = /^#([0-9a-f]{6})$/i.exec(c);
  if (!m) throw new Error(`unsupported color ${c}`);
  const v = parseInt(m[1], 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

export class Canvas {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4).fill(255);
  }

  px(x: number, y: number, c: Rgb): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    this.data[i] = c[0];
    this.data[i + 1] = c[1];
    this.data[i + 2] = c[2];
    this.data[i + 3] = 255;
  }

  dot(x: number, y: number, c: Rgb, w: number): void {
    const cx = Math.round(x);
    const cy = Math.round(y);
    if (w <= 1) {
      this.px(cx, cy, c);
      return;
    }
    const r = w / 2;
    const n = Math.ceil(r);
    for (let dy = -n; dy <= n; dy++) {
      for (let dx = -n; dx <= n; dx++) {
        if (dx * dx + dy * dy <= r * r) this.px(cx + dx, cy + dy, c);
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, c: Rgb,
       w: number): void {
    const steps = Math.max(Math.abs(x2 - x1), Math.abs(y2 - y1), 1);
    const n = Math.ceil(steps);
    for (let i = 0; i <= n; i++) {
      const t = i / n;
      this.dot(x1 + (x2 - x1) * t, y1 + (y2 - y1) * t, c, w);
    }
  }

  circle(cx: number, cy: number, r: number, stroke: Rgb | null,
         fill: Rgb | null): void {
    if (fill) {
      const n = Math.ceil(r);
      for (let dy = -n; dy <= n; dy++) {
        const half = Math.sqrt(Math.max(r * r - dy * dy, 0));
        const y = Math.round(cy + dy);
        for (let x = Math.round(cx - half); x <= Math.round(cx + half);
             x++) {
          this.px(x, y, fill);
        }
      }
    }
    if (stroke) {
      const steps = Math.max(16, Math.ceil(r * 8));
      let prev: [number, number] | null = null;
      for (let i = 0; i <= steps; i++) {
        const a = (2 * Math.PI * i) / steps;
        const x = cx + r * Math.cos(a);
        const y = cy + r * Math.sin(a);
        if (prev) this.line(prev[0], prev[1], x, y, stroke, 1);
        prev = [x, y];
      }
    }
  }

  rect(x: number, y: number, w: number, h: number, stroke: Rgb | null,
       fill: Rgb | null): void {
    if (fill) {
      for (let yy = Math.round(y); yy < Math.round(y + h); yy++) {
        for (let xx = Math.round(x); xx < Math.round(x + w); xx++) {
          this.px(xx, yy, fill);
        }
      }
    }
    if (stroke) {
      this.line(x, y, x + w, y, stroke, 1);
      this.line(x + w, y, x + w, y + h, stroke, 1);
      this.line(x + w, y + h, x, y + h, stroke, 1);
      this.line(x, y + h, x, y, stroke, 1);
    }
  }

  text(x: number, y: number, s: string, size: number,
       anchor: "start" | "middle" | "end", c: Rgb): void {
    const scale = size / 8;
    const total = s.length * ADVANCE * scale;
    let ox = x;
    if (anchor === "middle") ox -= total / 2;
    if (anchor === "end") ox -= total;
    const w = size >= 14 ? 2 : 1;
    for (const ch of s) {
      for (const stroke of glyph(ch)) {
        for (let i = 1; i < stroke.length; i++) {
          this.line(
            ox + stroke[i - 1][0] * scale, y + (stroke[i - 1][1] - 6) * scale,
            ox + stroke[i][0] * scale, y + (stroke[i][1] - 6) * scale,
            c, w,
          );
        }
      }
      ox += ADVANCE * scale;
    }
  }
}

function drawItem(cv: Canvas, it: Item): void {
  switch (it.type) {
    case "line": {
      const c = parseColor(it.stroke);
      if (c) cv.line(it.x1, it.y1, it.x2, it.y2, c, it.width);
      break;
    }
    case "polyline": {
      const c = parseColor(it.stroke);
      if (!c) break;
      for (let i = 1; i < it.points.length; i++) {
        cv.line(it.points[i - 1][0], it.points[i - 1][1],
                it.points[i][0], it.points[i][1], c, it.width);
      }
      break;
    }
    case "circle":
      cv.circle(it.cx, it.cy, it.r, parseColor(it.stroke),
                parseColor(it.fill));
      break;
    case "rect":
      cv.rect(it.x, it.y, it.w, it.h, parseColor(it.stroke),
              parseColor(it.fill));
      break;
    case "text":
      cv.text(it.x, it.y, it.text, it.size, it.anchor,
              parseColor(it.fill) ?? [0, 0, 0]);
      break;
  }
}

export function sceneToPng(scene: Scene): Buffer {
  const cv = new Canvas(Math.round(scene.width), Math.round(scene.height));
  for (const it of scene.items) drawItem(cv, it);
  return encodePng(cv.width, cv.height, cv.data);
}
