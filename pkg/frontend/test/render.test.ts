import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, describe, expect, it } from "vitest";

import { main } from "../src/cli.js";
import { buildConsumptionPanels, buildObjectiveCurve } from "../src/figures.js";
import { renderFigurePng, renderFigureSvg } from "../src/render.js";
import { parseExperimentsCsv } from "../src/schema.js";

const DATA = fileURLToPath(new URL("../../data", import.meta.url));
const CONSUMPTION = path.join(DATA, "reference_consumption.csv");
const UTILITY = [100, 200, 400].map((c) => path.join(DATA, `reference_utility_cap${c}.csv`));

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "plots-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

const rows = parseExperimentsCsv(fs.readFileSync(CONSUMPTION, "utf-8"));

describe("rendering", () => {
  it("renders the consumption panels from the reference CSV", () => {
    const svg = renderFigureSvg(buildConsumptionPanels(rows));
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("total energy (J)");
    expect(svg).toContain("accuracy (1 - mean error)");
    expect(svg).toContain("edge step budget");
  });

  it("renders the objective curve from the reference CSVs", () => {
    const inputs = UTILITY.map((p) => ({
      label: path.basename(p, ".csv"),
      rows: parseExperimentsCsv(fs.readFileSync(p, "utf-8")),
    }));
    const svg = renderFigureSvg(buildObjectiveCurve(inputs));
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("objective");
  });

  it("renders a single-record figure without crashing", () => {
    const svg = renderFigureSvg(buildObjectiveCurve([{ label: "one", rows: rows.slice(0, 1) }]));
    expect(svg.startsWith("<svg")).toBe(true);
  });

  it("rasterizes to PNG", () => {
    const png = renderFigurePng(buildObjectiveCurve([{ label: "one", rows: rows.slice(0, 3) }]));
    expect(png.subarray(1, 4).toString()).toBe("PNG");
  });
});

describe("command line", () => {
  it("writes both figure kinds end to end", () => {
    const out1 = path.join(tmp, "consumption.svg");
    expect(main([CONSUMPTION, "consumption-panels", out1])).toBe(0);
    expect(fs.readFileSync(out1, "utf-8")).toContain("<svg");

    const out2 = path.join(tmp, "objective.svg");
    expect(main([UTILITY.join(","), "objective-curve", out2])).toBe(0);
    expect(fs.readFileSync(out2, "utf-8")).toContain("<svg");
  });

  it("fails with the column name when a column is missing", () => {
    const broken = path.join(tmp, "broken.csv");
    fs.writeFileSync(
      broken,
      fs.readFileSync(CONSUMPTION, "utf-8").replace("accuracy", "acc"),
    );
    const errors: string[] = [];
    const original = console.error;
    console.error = (m: string) => errors.push(String(m));
    try {
      expect(main([broken, "consumption-panels", path.join(tmp, "x.svg")])).toBe(1);
    } finally {
      console.error = original;
    }
    expect(errors.join("\n")).toContain("accuracy");
  });

  it("rejects unknown kinds and bad usage", () => {
    expect(main([CONSUMPTION, "pie-chart", path.join(tmp, "x.svg")])).toBe(2);
    expect(main([CONSUMPTION])).toBe(2);
  });
});
