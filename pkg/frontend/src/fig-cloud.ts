/**
 * Render the screening-cloud figure: profiles plus the semilog length law.
 *
 * Usage: node fig-cloud.js <input-dir> <output.svg>
 * Expects <input-dir>/profile_J*.csv and <input-dir>/fits.json.
 */

import { readFileSync, readdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { parseCloudFits, parseProfile } from "./csv.js";
import { figCloud } from "./figures.js";

export function main(args: string[]): number {
  if (args.length !== 2) {
    console.error("usage: fig-cloud <input-dir> <output.svg>");
    return 2;
  }
  const [inputDir, outPath] = args;
  try {
    const names = readdirSync(inputDir)
      .filter((f) => f.startsWith("profile_J") && f.endsWith(".csv"))
      .sort();
    if (names.length === 0) throw new Error("no profile_J*.csv inputs found");
    const profiles = names.map((f) => parseProfile(readFileSync(join(inputDir, f), "utf8")));
    const fits = parseCloudFits(readFileSync(join(inputDir, "fits.json"), "utf8"));
    writeFileSync(outPath, figCloud(profiles, fits));
  } catch (err) {
    console.error(`fig-cloud: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("fig-cloud.js")) {
  process.exitCode = main(process.argv.slice(2));
}
