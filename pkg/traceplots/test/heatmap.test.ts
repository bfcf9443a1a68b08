import { createHash } from "crypto";
import { existsSync, mkdtempSync, readFileSync, statSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { plotTraceHeatmap, renderTraceHeatmap } from "../src/heatmap";
import { pngSize } from "../src/png";
import { SchemaError, loadTraceDoc } from "../src/schema";

const TRACE = join(__dirname, "fixtures", "trace.json");

function outDir(): string {
  return mkdtempSync(join(tmpdir(), "traceplots-heatmap-"));
}

describe("plotTraceHeatmap", () => {
  it("writes a decodable non-empty PNG from the golden trace", () => {
    const out = join(outDir(), "heat.png");
    const render = plotTraceHeatmap(TRACE, 0, 0, out);
    expect(existsSync(out)).toBe(true);
    expect(statSync(out).size).toBeGreaterThan(0);
    const { width, height } = pngSize(readFileSync(out));
    expect(width).toBe(render.width);
    expect(height).toBe(render.height);
  });

  it("passes the alpha matrix through unchanged", () => {
    const doc = loadTraceDoc(TRACE);
    const rec = doc.records[2];
    const render = renderTraceHeatmap(rec, "png");
    expect(render.matrix).toEqual(rec.steps.map((s) => s.alpha));
    expect(render.tokens).toEqual(rec.tokens);
    expect(render.chosen).toEqual(rec.steps.map((s) => s.chosen_index));
  });

  it("rejects an unknown record id listing the available ones", () => {
    const out = join(outDir(), "nope.png");
    expect(() => plotTraceHeatmap(TRACE, 424242, 0, out)).toThrow(SchemaError);
    expect(() => plotTraceHeatmap(TRACE, 424242, 0, out)).toThrow(/available record ids/);
  });

  it("rejects an unknown layer index", () => {
    const out = join(outDir(), "nope.png");
    expect(() => plotTraceHeatmap(TRACE, 0, 57, out)).toThrow(/layers \[/);
  });

  it("renders SVG behind the flag", () => {
    const out = join(outDir(), "heat.svg");
    const render = plotTraceHeatmap(TRACE, 1, 1, out, { svg: true });
    const text = readFileSync(out, "utf-8");
    expect(text).toContain("<svg");
    expect(text).toContain("rect");
    expect(render.svg).toBe(text);
  });

  it("never modifies its input file", () => {
    const before = createHash("sha256").update(readFileSync(TRACE)).digest("hex");
    plotTraceHeatmap(TRACE, 0, 1, join(outDir(), "x.png"));
    const after = createHash("sha256").update(readFileSync(TRACE)).digest("hex");
    expect(after).toBe(before);
  });
});
