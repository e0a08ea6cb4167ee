/**
 * Standalone figure renderer for experiment CSVs.
 *
 *   plot-experiments <input.csv[,input2.csv,...]> <kind> <output.{svg,png}>
 *
 * Kinds: consumption-panels (one CSV; one series per method/weight setting,
 * three metric panels) and objective-curve (one or more CSVs; one series per
 * file, labelled by file stem).  SVG is the default vector output; a .png
 * extension rasterizes the same figure.
 */
import * as fs from "node:fs";
import * as path from "node:path";

import { buildConsumptionPanels, buildObjectiveCurve, Figure } from "./figures.js";
import { renderFigurePng, renderFigureSvg } from "./render.js";
import { parseExperimentsCsv, SchemaError } from "./schema.js";

const KINDS = ["consumption-panels", "objective-curve"] as const;
type Kind = (typeof KINDS)[number];

export function buildFigure(inputPaths: string[], kind: Kind,
                            warn: (m: string) => void = console.warn): Figure {
  const parsed = inputPaths.map((p) => ({
    label: path.basename(p).replace(/\.csv$/i, ""),
    rows: parseExperimentsCsv(fs.readFileSync(p, "utf-8"), p),
  }));
  if (kind === "consumption-panels") {
    if (parsed.length !== 1) {
      throw new SchemaError("consumption-panels expects exactly one input CSV");
    }
    return buildConsumptionPanels(parsed[0].rows, warn);
  }
  return buildObjectiveCurve(parsed, warn);
}

export function main(argv: string[]): number {
  if (argv.length !== 3) {
    console.error(
      "usage: plot-experiments <input.csv[,input2.csv,...]> " +
        `<${KINDS.join("|")}> <output.{svg,png}>`,
    );
    return 2;
  }
  const [inputsArg, kindArg, outputPath] = argv;
  if (!(KINDS as readonly string[]).includes(kindArg)) {
    console.error(`unknown figure kind "${kindArg}"; expected ${KINDS.join(" or ")}`);
    return 2;
  }
  const inputPaths = inputsArg.split(",").map((s) => s.trim()).filter(Boolean);
  try {
    const figure = buildFigure(inputPaths, kindArg as Kind);
    if (outputPath.toLowerCase().endsWith(".png")) {
      fs.writeFileSync(outputPath, renderFigurePng(figure));
    } else {
      fs.writeFileSync(outputPath, renderFigureSvg(figure), "utf-8");
    }
    console.log(`wrote ${outputPath}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(err.message);
      return 1;
    }
    if (err instanceof Error && "code" in err && err.code === "ENOENT") {
      console.error(`input not found: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && /cli\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
