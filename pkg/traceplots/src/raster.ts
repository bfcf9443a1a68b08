/** Minimal RGBA raster with rect/line/text primitives for the PNG backend. */

import { GLYPH_H, GLYPH_W, glyph } from "./font";
import { PAPER, Rgb } from "./color";

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8ClampedArray;

  constructor(width: number, height: number, background: Rgb = PAPER) {
    this.width = width;
    this.height = height;
    this.data = new Uint8ClampedArray(width * height * 4);
    this.fillRect(0, 0, width, height, background);
  }

  set(x: number, y: number, [r, g, b]: Rgb): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    this.data[i] = r;
    this.data[i + 1] = g;
    this.data[i + 2] = b;
    this.data[i + 3] = 255;
  }

  fillRect(x: number, y: number, w: number, h: number, color: Rgb): void {
    for (let yy = y; yy < y + h; yy++) {
      for (let xx = x; xx < x + w; xx++) {
        this.set(xx, yy, color);
      }
    }
  }

  outlineRect(x: number, y: number, w: number, h: number, color: Rgb, thickness = 1): void {
    for (let t = 0; t < thickness; t++) {
      for (let xx = x + t; xx < x + w - t; xx++) {
        this.set(xx, y + t, color);
        this.set(xx, y + h - 1 - t, color);
      }
      for (let yy = y + t; yy < y + h - t; yy++) {
        this.set(x + t, yy, color);
        this.set(x + w - 1 - t, yy, color);
      }
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, color: Rgb, thickness = 1): void {
    // Bresenham; thickness spreads perpendicular-ish by stamping a small square
    let x = Math.round(x0);
    let y = Math.round(y0);
    const ex = Math.round(x1);
    const ey = Math.round(y1);
    const dx = Math.abs(ex - x);
    const dy = -Math.abs(ey - y);
    const sx = x < ex ? 1 : -1;
    const sy = y < ey ? 1 : -1;
    let err = dx + dy;
    const r = Math.floor(thickness / 2);
    for (;;) {
      for (let oy = -r; oy <= r; oy++) {
        for (let ox = -r; ox <= r; ox++) {
          this.set(x + ox, y + oy, color);
        }
      }
      if (thickness === 1) this.set(x, y, color);
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

  text(x: number, y: number, s: string, color: Rgb, scale = 1): void {
    let cx = x;
    for (const ch of s) {
      const rows = glyph(ch);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if (rows[gy][gx] === "#") {
            this.fillRect(cx + gx * scale, y + gy * scale, scale, scale, color);
          }
        }
      }
      cx += (GLYPH_W + 1) * scale;
    }
  }
}

export function textWidth(s: string, scale = 1): number {
  return s.length * (GLYPH_W + 1) * scale - scale;
}

export function textHeight(scale = 1): number {
  return GLYPH_H * scale;
}
