/**
 * Parsing and validation of the two harness file contracts:
 * trace JSON ("drbert-trace/1") and the sweep CSV ("T,accuracy,macro_f1").
 * These readers never mutate their inputs.
 */

import { readFileSync } from "fs";

export const TRACE_SCHEMA = "drbert-trace/1";
export const SWEEP_HEADER = "T,accuracy,macro_f1";

export class SchemaError extends Error {}

export interface TraceStep {
  alpha: number[];
  chosen_index: number;
  chosen_token: string;
}

export interface TraceRecord {
  record_id: number;
  layer: number;
  tokens: string[];
  aspect_start: number;
  aspect_len: number;
  gold: string;
  predicted: string;
  steps: TraceStep[];
}

export interface TraceDoc {
  schema: string;
  reweight_len: number;
  records: TraceRecord[];
}

function fail(path: string, msg: string): never {
  throw new SchemaError(`${path}: ${msg}`);
}

export function loadTraceDoc(path: string): TraceDoc {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (e) {
    fail(path, `not readable as JSON (${(e as Error).message})`);
  }
  const doc = raw as TraceDoc;
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    fail(path, "expected a JSON object at top level");
  }
  if (doc.schema !== TRACE_SCHEMA) {
    fail(path, `schema is ${JSON.stringify(doc.schema)}, expected "${TRACE_SCHEMA}"`);
  }
  if (!Array.isArray(doc.records)) {
    fail(path, 'missing "records" array');
  }
  doc.records.forEach((rec, i) => {
    const where = `records[${i}]`;
    if (!Array.isArray(rec.tokens) || rec.tokens.length === 0) {
      fail(path, `${where}: missing tokens`);
    }
    if (!Number.isInteger(rec.record_id) || !Number.isInteger(rec.layer)) {
      fail(path, `${where}: record_id/layer must be integers`);
    }
    if (!Array.isArray(rec.steps) || rec.steps.length === 0) {
      fail(path, `${where}: missing steps`);
    }
    rec.steps.forEach((step, t) => {
      if (!Array.isArray(step.alpha) || step.alpha.length !== rec.tokens.length) {
        fail(path, `${where}.steps[${t}]: alpha length must equal token count`);
      }
      if (step.alpha.some((a) => typeof a !== "number" || !isFinite(a))) {
        fail(path, `${where}.steps[${t}]: alpha entries must be finite numbers`);
      }
      if (!Number.isInteger(step.chosen_index) ||
          step.chosen_index < 0 || step.chosen_index >= rec.tokens.length) {
        fail(path, `${where}.steps[${t}]: chosen_index out of range`);
      }
    });
  });
  return doc;
}

/** Locate one (record, layer) trace; the error lists what exists. */
export function findTraceRecord(doc: TraceDoc, recordId: number, layer: number): TraceRecord {
  const hit = doc.records.find((r) => r.record_id === recordId && r.layer === layer);
  if (hit) return hit;
  const ids = [...new Set(doc.records.map((r) => r.record_id))].sort((a, b) => a - b);
  const layers = [...new Set(doc.records.map((r) => r.layer))].sort((a, b) => a - b);
  throw new SchemaError(
    `no trace for record ${recordId} layer ${layer}; ` +
    `available record ids [${ids.join(", ")}], layers [${layers.join(", ")}]`);
}

export interface SweepRow {
  t: number;
  accuracy: number;
  macroF1: number;
}

export function loadSweepCsv(path: string): SweepRow[] {
  const text = readFileSync(path, "utf-8");
  const lines = text.split(/\r?\n/).filter((l, i, all) => l !== "" || i < all.length - 1);
  if (lines.length === 0) fail(path, "empty file");
  if (lines[0].trim() !== SWEEP_HEADER) {
    fail(path, `line 1: header is ${JSON.stringify(lines[0])}, expected "${SWEEP_HEADER}"`);
  }
  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    if (lines[i].trim() === "") continue;
    const cells = lines[i].split(",");
    if (cells.length !== 3) {
      fail(path, `line ${i + 1}: expected 3 columns, got ${cells.length}`);
    }
    const [t, acc, f1] = cells.map(Number);
    if (!Number.isInteger(t)) fail(path, `line ${i + 1}: T must be an integer`);
    if (![acc, f1].every((v) => isFinite(v) && v >= 0 && v <= 1)) {
      fail(path, `line ${i + 1}: metrics must be numbers in [0, 1]`);
    }
    rows.push({ t, accuracy: acc, macroF1: f1 });
  }
  if (rows.length === 0) fail(path, "no data rows");
  return rows;
}
