import { Item, Scene } from "./scene.js";

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmt(v: number): string {
  return String(Math.round(v * 100) / 100);
}

function itemSvg(it: Item): string {
  switch (it.type) {
    case "line":
      return `<line x1="${fmt(it.x1)}" y1="${fmt(it.y1)}" x2="${fmt(it.x2)}"`
        + ` y2="${fmt(it.y2)}" stroke="${it.stroke}"`
        + ` stroke-width="${it.width}"/>`;
    case "polyline": {
      const pts = it.points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
      return `<polyline points="${pts}" fill="none" stroke="${it.stroke}"`
        + ` stroke-width="${it.width}"/>`;
    }
    case "circle":
      return `<circle cx="${fmt(it.cx)}" cy="${fmt(it.cy)}" r="${it.r}"`
        + ` stroke="${it.stroke}" fill="${it.fill}"/>`;
    case "rect":
      return `<rect x="${fmt(it.x)}" y="${fmt(it.y)}" width="${fmt(it.w)}"`
        + ` height="${fmt(it.h)}" stroke="${it.stroke}" fill="${it.fill}"/>`;
    case "text":
      return `<text x="${fmt(it.x)}" y="${fmt(it.y)}" font-size="${it.size}"`
        + ` font-family="monospace" text-anchor="${it.anchor}"`
        + ` fill="${it.fill}">${esc(it.text)}</text>`;
  }
}

export function sceneToSvg(scene: Scene): string {
  const body = scene.items.map(itemSvg).join("\n  ");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}"`
    + ` height="${scene.height}" viewBox="0 0 ${scene.width}`
    + ` ${scene.height}">\n  <rect width="${scene.width}"`
    + ` height="${scene.height}" fill="#ffffff"/>\n  ${body}\n</svg>\n`;
}
