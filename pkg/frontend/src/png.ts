/**
 * Dependency-free PNG rasterization of a figure.
 *
 * Draws lines, rectangles and polylines into an RGBA buffer and encodes
 * it as an 8-bit truecolor-alpha PNG (zlib from node, CRC32 below).
 * Text primitives are skipped: PNG output carries the plot geometry,
 * SVG is the labeled format.
 */
import { deflateSync } from 'node:zlib';

import type { Figure, Rgb } from './figure.js';

export class Raster {
  readonly data: Uint8Array;

  constructor(public readonly width: number, public readonly height: number) {
    this.data = new Uint8Array(width * height * 4).fill(255);
  }

  set(x: number, y: number, [r, g, b]: Rgb): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.width || yi >= this.height) return;
    const at = (yi * this.width + xi) * 4;
    this.data[at] = r;
    this.data[at + 1] = g;
    this.data[at + 2] = b;
    this.data[at + 3] = 255;
  }

  fillRect(x: number, y: number, w: number, h: number, color: Rgb): void {
    for (let yy = Math.round(y); yy < Math.round(y + h); yy++) {
      for (let xx = Math.round(x); xx < Math.round(x + w); xx++) {
        this.set(xx, yy, color);
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, color: Rgb): void {
    // Bresenham on rounded endpoints
    let x = Math.round(x1);
    let y = Math.round(y1);
    const ex = Math.round(x2);
    const ey = Math.round(y2);
    const dx = Math.abs(ex - x);
    const dy = -Math.abs(ey - y);
    const sx = x < ex ? 1 : -1;
    const sy = y < ey ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(x, y, color);
      if (x === ex && y === ey) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

export function crc32(data: Uint8Array): number {
  let crc = 0xffffffff;
  for (const byte of data) {
    crc = (CRC_TABLE[(crc ^ byte) & 0xff] as number) ^ (crc >>> 8);
  }
  return (crc ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Buffer {
  const header = Buffer.alloc(4);
  header.writeUInt32BE(data.length);
  const body = Buffer.concat([Buffer.from(type, 'latin1'), Buffer.from(data)]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(body));
  return Buffer.concat([header, body, crc]);
}

export function encodePng(raster: Raster): Buffer {
  const { width, height, data } = raster;
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // RGBA
  // scanlines with filter byte 0
  const raw = Buffer.alloc(height * (1 + width * 4));
  for (let y = 0; y < height; y++) {
    const rowStart = y * (1 + width * 4);
    raw[rowStart] = 0;
    raw.set(data.subarray(y * width * 4, (y + 1) * width * 4), rowStart + 1);
  }
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk('IHDR', ihdr),
    chunk('IDAT', deflateSync(raw)),
    chunk('IEND', new Uint8Array(0)),
  ]);
}

export function renderPng(figure: Figure): Buffer {
  const raster = new Raster(figure.width, figure.height);
  for (const p of figure.primitives) {
    switch (p.type) {
      case 'rect':
        if (p.fill) {
          raster.fillRect(p.x, p.y, p.w, p.h, p.color);
        } else {
          raster.line(p.x, p.y, p.x + p.w, p.y, p.color);
          raster.line(p.x, p.y + p.h, p.x + p.w, p.y + p.h, p.color);
          raster.line(p.x, p.y, p.x, p.y + p.h, p.color);
          raster.line(p.x + p.w, p.y, p.x + p.w, p.y + p.h, p.color);
        }
        break;
      case 'line':
        raster.line(p.x1, p.y1, p.x2, p.y2, p.color);
        break;
      case 'polyline':
        for (let i = 1; i < p.points.length; i++) {
          const [x1, y1] = p.points[i - 1] as [number, number];
          const [x2, y2] = p.points[i] as [number, number];
          raster.line(x1, y1, x2, y2, p.color);
        }
        break;
      case 'text':
        break; // geometry only; SVG carries labels
    }
  }
  return encodePng(raster);
}
