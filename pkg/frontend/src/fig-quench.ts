/**
 * Render the quench trace + spectrum figure.
 *
 * Usage: node fig-quench.js <input-dir> <output.svg>
 * Expects <input-dir>/series.csv and <input-dir>/spectrum.csv.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { parseSpectrum, parseTimeseries } from "./csv.js";
import { figQuench } from "./figures.js";

export function main(args: string[]): number {
  if (args.length !== 2) {
    console.error("usage: fig-quench <input-dir> <output.svg>");
    return 2;
  }
  const [inputDir, outPath] = args;
  try {
    const series = parseTimeseries(readFileSync(join(inputDir, "series.csv"), "utf8"));
    const spectrum = parseSpectrum(readFileSync(join(inputDir, "spectrum.csv"), "utf8"));
    writeFileSync(outPath, figQuench(series, spectrum));
  } catch (err) {
    console.error(`fig-quench: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("fig-quench.js")) {
  process.exitCode = main(process.argv.slice(2));
}
