#!/usr/bin/env node
/** plotkit: regenerate benchmark figures from evocd CSV output.
 *
 *   plotkit gain-bars --input aggregate.csv --out fig.svg [--metric S|K]
 *   plotkit flow      --input partitions.csv --out fig.svg [--snapshots 0,6,12]
 *   plotkit series    --input series.csv --out fig.svg [--metric S|K]
 *
 * Output format follows the --out extension (or --format svg|png); SVG is
 * the primary format, PNG rasterizes the geometry without text labels.
 */

import { writeFileSync } from "node:fs";
import { readCsv } from "./csv.js";
import { Figure } from "./svg.js";
import { gainBarLayout, renderGainBars } from "./gainBars.js";
import { flowLayout, renderFlow } from "./flow.js";
import { renderSeries, seriesLayout } from "./series.js";

interface Args {
  command: string;
  options: Map<string, string>;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0 || argv[0].startsWith("--")) {
    throw new Error("usage: plotkit <gain-bars|flow|series> --input <csv> --out <file>");
  }
  const options = new Map<string, string>();
  for (let i = 1; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad option: ${argv[i]}`);
    }
    options.set(argv[i].slice(2), argv[i + 1]);
  }
  return { command: argv[0], options };
}

function need(args: Args, name: string): string {
  const value = args.options.get(name);
  if (!value) throw new Error(`missing required option --${name}`);
  return value;
}

const FIGURE_KINDS = ["gain-bars", "flow", "series"];

export function buildFigure(args: Args): Figure {
  if (!FIGURE_KINDS.includes(args.command)) {
    throw new Error(`unknown figure kind '${args.command}' (${FIGURE_KINDS.join(", ")})`);
  }
  const rows = readCsv(need(args, "input"));
  switch (args.command) {
    case "gain-bars":
      return renderGainBars(gainBarLayout(rows, args.options.get("metric") ?? "S"));
    case "flow": {
      const spec = args.options.get("snapshots");
      let snapshots: number[];
      if (spec) {
        snapshots = spec.split(",").map((s) => Number(s.trim()));
      } else {
        const ts = [...new Set(rows.map((r) => Number(r.t)))].sort((a, b) => a - b);
        const take = Math.min(6, ts.length);
        snapshots = Array.from({ length: take }, (_, i) =>
          ts[Math.round((i * (ts.length - 1)) / Math.max(1, take - 1))],
        );
      }
      return renderFlow(flowLayout(rows, snapshots));
    }
    case "series":
      return renderSeries(seriesLayout(rows, args.options.get("metric") ?? "S"));
    default:
      throw new Error(`unknown figure kind '${args.command}'`);
  }
}

export function main(argv: string[]): void {
  const args = parseArgs(argv);
  const out = need(args, "out");
  const format = args.options.get("format") ?? (out.endsWith(".png") ? "png" : "svg");
  const figure = buildFigure(args);
  if (format === "png") {
    writeFileSync(out, figure.toPng());
  } else if (format === "svg") {
    writeFileSync(out, figure.toSvg());
  } else {
    throw new Error(`unknown format '${format}' (svg or png)`);
  }
  console.log(`wrote ${out}`);
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  try {
    main(process.argv.slice(2));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exit(1);
  }
}
