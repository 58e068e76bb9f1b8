/** Minimal deterministic PNG writer (RGBA, zlib from node, explicit CRC). */

import { deflateSync } from 'node:zlib';

const CRC_TABLE = (() => {
  const t = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    t[n] = c >>> 0;
  }
  return t;
})();

function crc32(buf: Uint8Array): number {
  let c = 0xffffffff;
  for (const b of buf) c = CRC_TABLE[(c ^ b) & 0xff] ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Uint8Array {
  const out = new Uint8Array(12 + data.length);
  const dv = new DataView(out.buffer);
  dv.setUint32(0, data.length);
  for (let i = 0; i < 4; i++) out[4 + i] = type.charCodeAt(i);
  out.set(data, 8);
  dv.setUint32(8 + data.length, crc32(out.subarray(4, 8 + data.length)));
  return out;
}

export class Raster {
  readonly pixels: Uint8Array;

  constructor(readonly width: number, readonly height: number) {
    this.pixels = new Uint8Array(width * height * 4).fill(255);
  }

  set(x: number, y: number, rgb: [number, number, number]): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) return;
    const o = (yi * this.width + xi) * 4;
    this.pixels[o] = rgb[0];
    this.pixels[o + 1] = rgb[1];
    this.pixels[o + 2] = rgb[2];
  }

  disc(x: number, y: number, r: number, rgb: [number, number, number]): void {
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        if (dx * dx + dy * dy <= r * r) this.set(x + dx, y + dy, rgb);
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, rgb: [number, number, number]): void {
    const steps = Math.max(Math.abs(x2 - x1), Math.abs(y2 - y1), 1) * 2;
    for (let s = 0; s <= steps; s++) {
      const t = s / steps;
      this.set(x1 + t * (x2 - x1), y1 + t * (y2 - y1), rgb);
    }
  }

  encode(): Uint8Array {
    const { width, height, pixels } = this;
    const raw = new Uint8Array(height * (1 + width * 4));
    for (let y = 0; y < height; y++) {
      raw[y * (1 + width * 4)] = 0; // filter none
      raw.set(pixels.subarray(y * width * 4, (y + 1) * width * 4), y * (1 + width * 4) + 1);
    }
    const ihdr = new Uint8Array(13);
    const dv = new DataView(ihdr.buffer);
    dv.setUint32(0, width);
    dv.setUint32(4, height);
    ihdr[8] = 8; // bit depth
    ihdr[9] = 6; // rgba
    const idat = new Uint8Array(deflateSync(raw, { level: 9 }));
    const sig = new Uint8Array([137, 80, 78, 71, 13, 10, 26, 10]);
    const parts = [sig, chunk('IHDR', ihdr), chunk('IDAT', idat), chunk('IEND', new Uint8Array(0))];
    const total = parts.reduce((a, p) => a + p.length, 0);
    const out = new Uint8Array(total);
    let o = 0;
    for (const p of parts) {
      out.set(p, o);
      o += p.length;
    }
    return out;
  }
}

/** Rasterize an already-rendered SVG's primitives cheaply.
 *
 * The renderer emits a restricted element set (lines, circles, polylines,
 * polygons, text); the raster companion draws the geometric elements and
 * skips text, which keeps the PNG output deterministic and dependency-free.
 */
export function rasterizeSvg(svg: string, width: number, height: number): Uint8Array {
  const r = new Raster(width, height);
  const color = (s: string): [number, number, number] => {
    if (s.startsWith('#') && s.length === 7) {
      return [
        parseInt(s.slice(1, 3), 16),
        parseInt(s.slice(3, 5), 16),
        parseInt(s.slice(5, 7), 16),
      ];
    }
    return [40, 40, 40];
  };
  for (const m of svg.matchAll(/<line x1="([-\d.]+)" y1="([-\d.]+)" x2="([-\d.]+)" y2="([-\d.]+)" stroke="([^"]+)"/g)) {
    r.line(+m[1], +m[2], +m[3], +m[4], color(m[5]));
  }
  for (const m of svg.matchAll(/<polyline points="([^"]+)" fill="none" stroke="([^"]+)"/g)) {
    const pts = m[1].split(' ').map((p) => p.split(',').map(Number));
    for (let i = 1; i < pts.length; i++) {
      r.line(pts[i - 1][0], pts[i - 1][1], pts[i][0], pts[i][1], color(m[2]));
    }
  }
  for (const m of svg.matchAll(/<circle cx="([-\d.]+)" cy="([-\d.]+)" r="([-\d.]+)" fill="([^"]+)"/g)) {
    r.disc(+m[1], +m[2], Math.round(+m[3]), color(m[4]));
  }
  return r.encode();
}
