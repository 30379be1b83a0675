import { deflateSync } from "node:zlib";

/** Minimal retained-mode canvas that serializes to SVG or rasterizes to PNG. */

export type Shape =
  | { kind: "rect"; x: number; y: number; w: number; h: number; fill: string; cls?: string; opacity?: number }
  | { kind: "line"; x1: number; y1: number; x2: number; y2: number; stroke: string; width: number; cls?: string }
  | { kind: "polyline"; points: [number, number][]; stroke: string; width: number; cls?: string }
  | { kind: "polygon"; points: [number, number][]; fill: string; cls?: string; opacity?: number }
  | { kind: "text"; x: number; y: number; text: string; size: number; anchor?: string; cls?: string };

export class Figure {
  shapes: Shape[] = [];

  constructor(public width: number, public height: number) {}

  add(shape: Shape): void {
    this.shapes.push(shape);
  }

  count(cls: string): number {
    return this.shapes.filter((s) => "cls" in s && s.cls === cls).length;
  }

  toSvg(): string {
    const parts: string[] = [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect x="0" y="0" width="${this.width}" height="${this.height}" fill="white"/>`,
    ];
    for (const s of this.shapes) {
      const cls = "cls" in s && s.cls ? ` class="${s.cls}"` : "";
      switch (s.kind) {
        case "rect":
          parts.push(
            `<rect${cls} x="${fmt(s.x)}" y="${fmt(s.y)}" width="${fmt(s.w)}" height="${fmt(s.h)}"` +
              ` fill="${s.fill}"${s.opacity !== undefined ? ` fill-opacity="${s.opacity}"` : ""}/>`,
          );
          break;
        case "line":
          parts.push(
            `<line${cls} x1="${fmt(s.x1)}" y1="${fmt(s.y1)}" x2="${fmt(s.x2)}" y2="${fmt(s.y2)}"` +
              ` stroke="${s.stroke}" stroke-width="${s.width}"/>`,
          );
          break;
        case "polyline":
          parts.push(
            `<polyline${cls} points="${s.points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ")}"` +
              ` fill="none" stroke="${s.stroke}" stroke-width="${s.width}"/>`,
          );
          break;
        case "polygon":
          parts.push(
            `<polygon${cls} points="${s.points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ")}"` +
              ` fill="${s.fill}"${s.opacity !== undefined ? ` fill-opacity="${s.opacity}"` : ""}/>`,
          );
          break;
        case "text":
          parts.push(
            `<text${cls} x="${fmt(s.x)}" y="${fmt(s.y)}" font-size="${s.size}"` +
              ` font-family="sans-serif" text-anchor="${s.anchor ?? "start"}">${escapeXml(s.text)}</text>`,
          );
          break;
      }
    }
    parts.push("</svg>");
    return parts.join("\n");
  }

  /** Rasterize shapes to PNG (labels are a vector-only feature). */
  toPng(): Buffer {
    const raster = new Raster(this.width, this.height);
    raster.fill(255, 255, 255);
    for (const s of this.shapes) {
      switch (s.kind) {
        case "rect":
          raster.polygon(
            [
              [s.x, s.y],
              [s.x + s.w, s.y],
              [s.x + s.w, s.y + s.h],
              [s.x, s.y + s.h],
            ],
            parseColor(s.fill),
            s.opacity ?? 1,
          );
          break;
        case "polygon":
          raster.polygon(s.points, parseColor(s.fill), s.opacity ?? 1);
          break;
        case "line":
          raster.line(s.x1, s.y1, s.x2, s.y2, parseColor(s.stroke), s.width);
          break;
        case "polyline":
          for (let i = 1; i < s.points.length; i++) {
            const [x1, y1] = s.points[i - 1];
            const [x2, y2] = s.points[i];
            raster.line(x1, y1, x2, y2, parseColor(s.stroke), s.width);
          }
          break;
        case "text":
          break; // skipped in raster output
      }
    }
    return raster.encodePng();
  }
}

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

const NAMED: Record<string, [number, number, number]> = {
  white: [255, 255, 255],
  black: [0, 0, 0],
  grey: [128, 128, 128],
  gray: [128, 128, 128],
};

function parseColor(color: string): [number, number, number] {
  if (color.startsWith("#")) {
    const hex = color.slice(1);
    return [
      parseInt(hex.slice(0, 2), 16),
      parseInt(hex.slice(2, 4), 16),
      parseInt(hex.slice(4, 6), 16),
    ];
  }
  return NAMED[color] ?? [0, 0, 0];
}

class Raster {
  data: Uint8Array;

  constructor(public width: number, public height: number) {
    this.data = new Uint8Array(width * height * 3);
  }

  fill(r: number, g: number, b: number): void {
    for (let i = 0; i < this.data.length; i += 3) {
      this.data[i] = r;
      this.data[i + 1] = g;
      this.data[i + 2] = b;
    }
  }

  private blend(x: number, y: number, rgb: [number, number, number], alpha: number): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 3;
    this.data[i] = Math.round(rgb[0] * alpha + this.data[i] * (1 - alpha));
    this.data[i + 1] = Math.round(rgb[1] * alpha + this.data[i + 1] * (1 - alpha));
    this.data[i + 2] = Math.round(rgb[2] * alpha + this.data[i + 2] * (1 - alpha));
  }

  polygon(points: [number, number][], rgb: [number, number, number], alpha: number): void {
    const ys = points.map(([, y]) => y);
    const y0 = Math.max(0, Math.floor(Math.min(...ys)));
    const y1 = Math.min(this.height - 1, Math.ceil(Math.max(...ys)));
    for (let y = y0; y <= y1; y++) {
      const yc = y + 0.5;
      const xs: number[] = [];
      for (let i = 0; i < points.length; i++) {
        const [ax, ay] = points[i];
        const [bx, by] = points[(i + 1) % points.length];
        if (ay <= yc !== by <= yc) {
          xs.push(ax + ((yc - ay) / (by - ay)) * (bx - ax));
        }
      }
      xs.sort((a, b) => a - b);
      for (let k = 0; k + 1 < xs.length; k += 2) {
        const xa = Math.max(0, Math.round(xs[k]));
        const xb = Math.min(this.width - 1, Math.round(xs[k + 1]));
        for (let x = xa; x <= xb; x++) this.blend(x, y, rgb, alpha);
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, rgb: [number, number, number], width: number): void {
    const steps = Math.max(1, Math.ceil(Math.hypot(x2 - x1, y2 - y1) * 2));
    const r = Math.max(0.5, width / 2);
    for (let s = 0; s <= steps; s++) {
      const x = x1 + ((x2 - x1) * s) / steps;
      const y = y1 + ((y2 - y1) * s) / steps;
      for (let dy = -Math.ceil(r); dy <= Math.ceil(r); dy++) {
        for (let dx = -Math.ceil(r); dx <= Math.ceil(r); dx++) {
          if (dx * dx + dy * dy <= r * r) {
            this.blend(Math.round(x) + dx, Math.round(y) + dy, rgb, 1);
          }
        }
      }
    }
  }

  encodePng(): Buffer {
    const { width, height, data } = this;
    const raw = Buffer.alloc(height * (width * 3 + 1));
    for (let y = 0; y < height; y++) {
      raw[y * (width * 3 + 1)] = 0; // filter: none
      data.subarray(y * width * 3, (y + 1) * width * 3).forEach((v, i) => {
        raw[y * (width * 3 + 1) + 1 + i] = v;
      });
    }
    const ihdr = Buffer.alloc(13);
    ihdr.writeUInt32BE(width, 0);
    ihdr.writeUInt32BE(height, 4);
    ihdr[8] = 8; // bit depth
    ihdr[9] = 2; // color type: truecolor
    const chunks = [
      Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
      pngChunk("IHDR", ihdr),
      pngChunk("IDAT", deflateSync(raw)),
      pngChunk("IEND", Buffer.alloc(0)),
    ];
    return Buffer.concat(chunks);
  }
}

function pngChunk(type: string, payload: Buffer): Buffer {
  const out = Buffer.alloc(12 + payload.length);
  out.writeUInt32BE(payload.length, 0);
  out.write(type, 4, "ascii");
  payload.copy(out, 8);
  out.writeUInt32BE(crc32(out.subarray(4, 8 + payload.length)), 8 + payload.length);
  return out;
}

let CRC_TABLE: Uint32Array | null = null;

function crc32(buf: Buffer): number {
  if (!CRC_TABLE) {
    CRC_TABLE = new Uint32Array(256);
    for (let n = 0; n < 256; n++) {
      let c = n;
      for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
      CRC_TABLE[n] = c >>> 0;
    }
  }
  let crc = 0xffffffff;
  for (const byte of buf) crc = CRC_TABLE[(crc ^ byte) & 0xff] ^ (crc >>> 8);
  return (crc ^ 0xffffffff) >>> 0;
}

export const PALETTE = [
  "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#eeca3b",
  "#b279a2", "#ff9da6", "#9d755d", "#bab0ac", "#2f4b7c", "#a05195",
];
