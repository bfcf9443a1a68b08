export { SchemaError, findTraceRecord, loadSweepCsv, loadTraceDoc } from "./schema";
export type { SweepRow, TraceDoc, TraceRecord, TraceStep } from "./schema";
export { plotTraceHeatmap, renderTraceHeatmap } from "./heatmap";
export type { HeatmapRender } from "./heatmap";
export { plotTSweep, renderSweep } from "./sweep";
export type { SweepRender } from "./sweep";
export { encodePng, pngSize } from "./png";
