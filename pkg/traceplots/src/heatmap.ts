/**
 * Selection heatmap: tokens down the left, re-weighting steps across the
 * top, cell color = selection weight, chosen cell per step outlined.
 */

import { writeFileSync } from "fs";
import { ACCENT, INK, css, viridis } from "./color";
import { encodePng } from "./png";
import { Raster, textHeight, textWidth } from "./raster";
import { Svg } from "./svg";
import { TraceRecord, findTraceRecord, loadTraceDoc } from "./schema";

const CELL = 26;
const GAP = 2;
const PAD = 14;
const SCALE_BAR_H = 10;

export interface HeatmapRender {
  /** alpha weights exactly as parsed, [step][token] */
  matrix: number[][];
  tokens: string[];
  chosen: number[];
  width: number;
  height: number;
  png?: Buffer;
  svg?: string;
}

function layout(rec: TraceRecord) {
  const steps = rec.steps.length;
  const labelW = Math.max(...rec.tokens.map((t) => textWidth(t)), textWidth("step"));
  const left = PAD + labelW + 8;
  const top = PAD + textHeight() + 10 + textHeight() + 8;
  const width = left + steps * (CELL + GAP) + PAD;
  const height = top + rec.tokens.length * (CELL + GAP) + PAD + SCALE_BAR_H + textHeight() + 8;
  return { steps, left, top, width, height };
}

function title(rec: TraceRecord): [string, string] {
  const aspect = rec.tokens
    .slice(rec.aspect_start, rec.aspect_start + rec.aspect_len)
    .join(" ");
  return [
    `record ${rec.record_id} layer ${rec.layer}`,
    `aspect '${aspect}' gold ${rec.gold} pred ${rec.predicted}`,
  ];
}

export function renderTraceHeatmap(rec: TraceRecord, format: "png" | "svg"): HeatmapRender {
  const { steps, left, top, width, height } = layout(rec);
  const matrix = rec.steps.map((s) => s.alpha.slice());
  const chosen = rec.steps.map((s) => s.chosen_index);
  const [line1, line2] = title(rec);

  const cellX = (t: number) => left + t * (CELL + GAP);
  const cellY = (i: number) => top + i * (CELL + GAP);
  const scaleY = top + rec.tokens.length * (CELL + GAP) + PAD;

  if (format === "png") {
    const r = new Raster(width, height);
    r.text(PAD, PAD, line1, INK);
    r.text(PAD, PAD + textHeight() + 3, line2, INK);
    for (let t = 0; t < steps; t++) {
      const label = String(t + 1);
      r.text(cellX(t) + Math.floor((CELL - textWidth(label)) / 2), top - textHeight() - 3,
             label, INK);
    }
    rec.tokens.forEach((tok, i) => {
      const inAspect = i >= rec.aspect_start && i < rec.aspect_start + rec.aspect_len;
      r.text(left - 8 - textWidth(tok), cellY(i) + Math.floor((CELL - textHeight()) / 2),
             tok, inAspect ? ACCENT : INK);
    });
    for (let t = 0; t < steps; t++) {
      for (let i = 0; i < rec.tokens.length; i++) {
        r.fillRect(cellX(t), cellY(i), CELL, CELL, viridis(matrix[t][i]));
      }
      r.outlineRect(cellX(t), cellY(chosen[t]), CELL, CELL, ACCENT, 2);
    }
    const barW = steps * (CELL + GAP) - GAP;
    for (let x = 0; x < barW; x++) {
      for (let y = 0; y < SCALE_BAR_H; y++) {
        r.set(left + x, scaleY + y, viridis(x / (barW - 1)));
      }
    }
    r.text(left, scaleY + SCALE_BAR_H + 3, "0", INK);
    r.text(left + barW - textWidth("1"), scaleY + SCALE_BAR_H + 3, "1", INK);
    return { matrix, tokens: rec.tokens, chosen, width, height, png: encodePng(r) };
  }

  const svg = new Svg(width, height);
  svg.text(PAD, PAD + 10, line1, css(INK), 12);
  svg.text(PAD, PAD + 26, line2, css(INK), 11);
  for (let t = 0; t < steps; t++) {
    svg.text(cellX(t) + CELL / 2, top - 6, String(t + 1), css(INK), 11, "middle");
  }
  rec.tokens.forEach((tok, i) => {
    const inAspect = i >= rec.aspect_start && i < rec.aspect_start + rec.aspect_len;
    svg.text(left - 8, cellY(i) + CELL / 2 + 4, tok, css(inAspect ? ACCENT : INK), 11, "end");
  });
  for (let t = 0; t < steps; t++) {
    for (let i = 0; i < rec.tokens.length; i++) {
      svg.rect(cellX(t), cellY(i), CELL, CELL, css(viridis(matrix[t][i])));
    }
    svg.outline(cellX(t), cellY(chosen[t]), CELL, CELL, css(ACCENT), 2);
  }
  const barW = steps * (CELL + GAP) - GAP;
  for (let x = 0; x < barW; x += 2) {
    svg.rect(left + x, scaleY, 2, SCALE_BAR_H, css(viridis(x / (barW - 1))));
  }
  svg.text(left, scaleY + SCALE_BAR_H + 12, "0", css(INK), 10);
  svg.text(left + barW, scaleY + SCALE_BAR_H + 12, "1", css(INK), 10, "end");
  return { matrix, tokens: rec.tokens, chosen, width, height, svg: svg.toString() };
}

/** File-level op: trace JSON -> image file for one (record, layer). */
export function plotTraceHeatmap(tracePath: string, recordId: number, layer: number,
                                 outPath: string, opts: { svg?: boolean } = {}): HeatmapRender {
  const doc = loadTraceDoc(tracePath);
  const rec = findTraceRecord(doc, recordId, layer);
  const render = renderTraceHeatmap(rec, opts.svg ? "svg" : "png");
  writeFileSync(outPath, opts.svg ? render.svg! : render.png!);
  return render;
}
