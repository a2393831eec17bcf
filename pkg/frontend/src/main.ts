/**
 * CLI: render paper-style figures from a benchmark CSV.
 *
 *   node dist/main.js velocity <benchmark.csv> <out.svg>
 *   node dist/main.js baseline <benchmark.csv> <out.svg>
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseBenchmarkCsv } from "./csv.js";
import { baselineFigure, velocityFigure } from "./figures.js";

function main(argv: string[]): number {
  if (argv.length !== 3 || !["velocity", "baseline"].includes(argv[0])) {
    process.stderr.write(
      "usage: main.js {velocity|baseline} <benchmark.csv> <out.svg>\n",
    );
    return 2;
  }
  const [kind, csvPath, outPath] = argv;
  let csv;
  try {
    csv = parseBenchmarkCsv(readFileSync(csvPath, "utf-8"));
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
  const svg = kind === "velocity" ? velocityFigure(csv) : baselineFigure(csv);
  writeFileSync(outPath, svg);
  process.stdout.write(`wrote ${outPath}\n`);
  return 0;
}

process.exit(main(process.argv.slice(2)));
