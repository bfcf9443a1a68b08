#!/usr/bin/env node
/**
 * traceplots heatmap --trace trace.json --record 0 --layer 1 --out out.png [--svg]
 * traceplots sweep   --csv sweep.csv --out out.png [--svg]
 *
 * Exit codes: 0 success, 2 validation/schema error.
 */

import { plotTraceHeatmap } from "./heatmap";
import { SchemaError } from "./schema";
import { plotTSweep } from "./sweep";

function parseFlags(argv: string[]): Map<string, string | boolean> {
  const flags = new Map<string, string | boolean>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new SchemaError(`unexpected argument ${arg}`);
    const key = arg.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      flags.set(key, argv[++i]);
    } else {
      flags.set(key, true);
    }
  }
  return flags;
}

function requireString(flags: Map<string, string | boolean>, key: string): string {
  const v = flags.get(key);
  if (typeof v !== "string") throw new SchemaError(`missing --${key}`);
  return v;
}

function requireInt(flags: Map<string, string | boolean>, key: string): number {
  const v = Number(requireString(flags, key));
  if (!Number.isInteger(v)) throw new SchemaError(`--${key} must be an integer`);
  return v;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    const svg = flags.get("svg") === true;
    if (command === "heatmap") {
      const out = requireString(flags, "out");
      plotTraceHeatmap(requireString(flags, "trace"), requireInt(flags, "record"),
                       requireInt(flags, "layer"), out, { svg });
      console.log(`wrote ${out}`);
      return 0;
    }
    if (command === "sweep") {
      const out = requireString(flags, "out");
      plotTSweep(requireString(flags, "csv"), out, { svg });
      console.log(`wrote ${out}`);
      return 0;
    }
    console.error("usage: traceplots heatmap|sweep ... (see README)");
    return 2;
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`error: ${e.message}`);
      return 2;
    }
    if (e instanceof Error && "code" in e && (e as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${e.message}`);
      return 2;
    }
    throw e;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
