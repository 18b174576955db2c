#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";
import { plotHistSvg } from "./plotHist.js";
import { plotSweepSvg } from "./plotSweep.js";

const USAGE = `usage: mxquant-plot <sweep|hist> <csv> [-o out.svg]

  sweep <csv>   render an MSE-vs-sigma sweep CSV as an SVG figure
  hist <csv>    render a region histogram CSV as an SVG grid

By default the SVG is written next to the CSV with a .svg extension.`;

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        out: { type: "string", short: "o" },
        help: { type: "boolean", short: "h" },
      },
      allowPositionals: true,
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  if (parsed.values.help) {
    console.log(USAGE);
    return 0;
  }
  const [kind, csvPath] = parsed.positionals;
  if ((kind !== "sweep" && kind !== "hist") || !csvPath || parsed.positionals.length > 2) {
    console.error(USAGE);
    return 2;
  }
  try {
    const csv = readFileSync(csvPath, "utf8");
    const svg = kind === "sweep" ? plotSweepSvg(csv) : plotHistSvg(csv);
    const target = parsed.values.out ?? csvPath.replace(/\.csv$/, "") + ".svg";
    writeFileSync(target, svg);
    console.log(`wrote ${target}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
