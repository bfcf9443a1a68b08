/**
 * Re-weighting-length sweep curves: accuracy and macro-F1 against T,
 * full [0, 1] metric axis, point markers so a single row still shows.
 */

import { writeFileSync } from "fs";
import { INK, SERIES_A, SERIES_B, css } from "./color";
import { encodePng } from "./png";
import { Raster, textHeight, textWidth } from "./raster";
import { Svg } from "./svg";
import { SweepRow, loadSweepCsv } from "./schema";

const W = 560;
const H = 360;
const MARGIN = { left: 64, right: 24, top: 40, bottom: 48 };

export interface SweepRender {
  rows: SweepRow[];
  series: Array<{ name: string; points: Array<[number, number]> }>;
  width: number;
  height: number;
  png?: Buffer;
  svg?: string;
}

function scales(rows: SweepRow[]) {
  const ts = rows.map((r) => r.t);
  const tMin = Math.min(...ts);
  const tMax = Math.max(...ts);
  const span = tMax > tMin ? tMax - tMin : 1;
  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const x = (t: number) => MARGIN.left + ((t - tMin) / span) * plotW;
  const y = (v: number) => MARGIN.top + (1 - v) * plotH;
  return { x, y, ts, plotW, plotH };
}

export function renderSweep(rows: SweepRow[], format: "png" | "svg"): SweepRender {
  const { x, y, ts } = scales(rows);
  const series = [
    { name: "accuracy", color: SERIES_A,
      points: rows.map((r) => [x(r.t), y(r.accuracy)] as [number, number]) },
    { name: "macro f1", color: SERIES_B,
      points: rows.map((r) => [x(r.t), y(r.macroF1)] as [number, number]) },
  ];
  const yTicks = [0, 0.2, 0.4, 0.6, 0.8, 1.0];

  if (format === "png") {
    const r = new Raster(W, H);
    r.text(MARGIN.left, 14, "metrics vs re-weighting length", INK);
    r.line(MARGIN.left, MARGIN.top, MARGIN.left, H - MARGIN.bottom, INK);
    r.line(MARGIN.left, H - MARGIN.bottom, W - MARGIN.right, H - MARGIN.bottom, INK);
    for (const v of yTicks) {
      const yy = Math.round(y(v));
      r.line(MARGIN.left - 4, yy, MARGIN.left, yy, INK);
      const label = v.toFixed(1);
      r.text(MARGIN.left - 8 - textWidth(label), yy - 3, label, INK);
    }
    for (const t of ts) {
      const xx = Math.round(x(t));
      r.line(xx, H - MARGIN.bottom, xx, H - MARGIN.bottom + 4, INK);
      const label = String(t);
      r.text(xx - Math.floor(textWidth(label) / 2), H - MARGIN.bottom + 8, label, INK);
    }
    r.text(Math.floor(W / 2) - textWidth("t") , H - textHeight() - 6, "T", INK);
    series.forEach((s, si) => {
      for (let i = 1; i < s.points.length; i++) {
        r.line(s.points[i - 1][0], s.points[i - 1][1], s.points[i][0], s.points[i][1],
               s.color, 2);
      }
      for (const [px, py] of s.points) {
        r.fillRect(Math.round(px) - 2, Math.round(py) - 2, 5, 5, s.color);
      }
      const lx = W - MARGIN.right - 140;
      const ly = MARGIN.top + 6 + si * (textHeight() + 6);
      r.fillRect(lx, ly + 2, 14, 3, s.color);
      r.text(lx + 20, ly, s.name, INK);
    });
    return { rows, series: series.map(({ name, points }) => ({ name, points })),
             width: W, height: H, png: encodePng(r) };
  }

  const svg = new Svg(W, H);
  svg.text(MARGIN.left, 20, "metrics vs re-weighting length", css(INK), 13);
  svg.line(MARGIN.left, MARGIN.top, MARGIN.left, H - MARGIN.bottom, css(INK));
  svg.line(MARGIN.left, H - MARGIN.bottom, W - MARGIN.right, H - MARGIN.bottom, css(INK));
  for (const v of yTicks) {
    svg.line(MARGIN.left - 4, y(v), MARGIN.left, y(v), css(INK));
    svg.text(MARGIN.left - 8, y(v) + 4, v.toFixed(1), css(INK), 10, "end");
  }
  for (const t of ts) {
    svg.line(x(t), H - MARGIN.bottom, x(t), H - MARGIN.bottom + 4, css(INK));
    svg.text(x(t), H - MARGIN.bottom + 16, String(t), css(INK), 10, "middle");
  }
  svg.text(W / 2, H - 10, "T", css(INK), 11, "middle");
  series.forEach((s, si) => {
    if (s.points.length > 1) svg.polyline(s.points, css(s.color));
    for (const [px, py] of s.points) svg.circle(px, py, 3, css(s.color));
    const lx = W - MARGIN.right - 140;
    const ly = MARGIN.top + 12 + si * 18;
    svg.line(lx, ly - 4, lx + 14, ly - 4, css(s.color), 3);
    svg.text(lx + 20, ly, s.name, css(INK), 11);
  });
  return { rows, series: series.map(({ name, points }) => ({ name, points })),
           width: W, height: H, svg: svg.toString() };
}

/** File-level op: sweep CSV -> line-plot image file. */
export function plotTSweep(csvPath: string, outPath: string,
                           opts: { svg?: boolean } = {}): SweepRender {
  const rows = loadSweepCsv(csvPath);
  const render = renderSweep(rows, opts.svg ? "svg" : "png");
  writeFileSync(outPath, opts.svg ? render.svg! : render.png!);
  return render;
}
