/**
 * Render the finite-size collapse overlay figure.
 *
 * Usage: node fig-collapse.js <input-dir> <output.svg>
 * Expects <input-dir>/collapse.csv.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { parseCollapse } from "./csv.js";
import { figCollapse } from "./figures.js";

export function main(args: string[]): number {
  if (args.length !== 2) {
    console.error("usage: fig-collapse <input-dir> <output.svg>");
    return 2;
  }
  const [inputDir, outPath] = args;
  try {
    const groups = parseCollapse(readFileSync(join(inputDir, "collapse.csv"), "utf8"));
    writeFileSync(outPath, figCollapse(groups));
  } catch (err) {
    console.error(`fig-collapse: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("fig-collapse.js")) {
  process.exitCode = main(process.argv.slice(2));
}
