import * as fs from "node:fs";
import { describe, expect, it } from "vitest";

import { buildConsumptionPanels, buildObjectiveCurve } from "../src/figures.js";
import { parseExperimentsCsv } from "../src/schema.js";

const CONSUMPTION = new URL("../../data/reference_consumption.csv", import.meta.url);
const UTILITY_FILES = [100, 200, 400].map(
  (cap) => new URL(`../../data/reference_utility_cap${cap}.csv`, import.meta.url),
);

const consumptionText = fs.readFileSync(CONSUMPTION, "utf-8");
const rows = parseExperimentsCsv(consumptionText);

/** Independent CSV extraction: raw string split, no shared parsing code. */
function rawColumn(text: string, name: string): number[] {
  const lines = text.trim().split("\n");
  const idx = lines[0].split(",").indexOf(name);
  return lines.slice(1).map((line) => Number(line.split(",")[idx]));
}

describe("consumption panels", () => {
  const fig = buildConsumptionPanels(rows);

  it("has the three metric panels with labelled axes", () => {
    expect(fig.panels.map((p) => p.metric)).toEqual(["T_total_s", "accuracy", "E_total_J"]);
    for (const panel of fig.panels) {
      expect(panel.axisLabel.length).toBeGreaterThan(0);
    }
  });

  it("plots exactly the CSV coordinates, unaggregated", () => {
    for (const panel of fig.panels) {
      const xs = panel.series.flatMap((s) => s.x);
      const ys = panel.series.flatMap((s) => s.y);
      // every record contributes one point per panel
      expect(xs.length).toBe(rows.length);
      expect(xs.sort((a, b) => a - b)).toEqual(
        rawColumn(consumptionText, "swept_value").sort((a, b) => a - b),
      );
      expect(ys.sort((a, b) => a - b)).toEqual(
        rawColumn(consumptionText, panel.metric).sort((a, b) => a - b),
      );
    }
  });

  it("keeps per-series values aligned with their records", () => {
    // independent grouping: same key fields, assembled separately
    const keyed = new Map<string, { x: number[]; y: number[] }>();
    for (const r of rows) {
      const key = JSON.stringify([r.method, r.c1, r.c2, r.c3, r.w1, r.w2]);
      if (!keyed.has(key)) keyed.set(key, { x: [], y: [] });
      keyed.get(key)!.x.push(r.swept_value);
      keyed.get(key)!.y.push(r.T_total_s);
    }
    const expected = [...keyed.values()];
    const panel = fig.panels[0];
    expect(panel.series.length).toBe(expected.length);
    panel.series.forEach((series, i) => {
      expect(series.x).toEqual(expected[i].x);
      expect(series.y).toEqual(expected[i].y);
    });
  });

  it("orders series by first appearance in the CSV", () => {
    const labels = fig.panels[0].series.map((s) => s.label);
    expect(labels.length).toBe(5); // four weight settings + baseline
    expect(labels[0]).toMatch(/^proposed /);
    const baselineIndex = labels.findIndex((l) => l.startsWith("baseline"));
    expect(baselineIndex).toBe(1); // baseline rows follow the first preset's
  });

  it("is deterministic", () => {
    expect(buildConsumptionPanels(rows)).toEqual(fig);
  });

  it("warns on empty input but still yields panels", () => {
    const warnings: string[] = [];
    const empty = buildConsumptionPanels([], (m) => warnings.push(m));
    expect(empty.panels.length).toBe(3);
    expect(warnings.length).toBe(1);
  });
});

describe("objective curve", () => {
  const inputs = UTILITY_FILES.map((url, i) => ({
    label: `cap${[100, 200, 400][i]}`,
    rows: parseExperimentsCsv(fs.readFileSync(url, "utf-8")),
  }));
  const fig = buildObjectiveCurve(inputs);

  it("draws one series per input file", () => {
    expect(fig.series.map((s) => s.label)).toEqual(["cap100", "cap200", "cap400"]);
  });

  it("plots exactly the CSV coordinates", () => {
    UTILITY_FILES.forEach((url, i) => {
      const text = fs.readFileSync(url, "utf-8");
      expect(fig.series[i].x).toEqual(rawColumn(text, "swept_value"));
      expect(fig.series[i].y).toEqual(rawColumn(text, "objective"));
    });
  });

  it("handles a single-record series without crashing", () => {
    const single = buildObjectiveCurve([{ label: "one", rows: rows.slice(0, 1) }]);
    expect(single.series[0].x).toEqual([rows[0].swept_value]);
  });
});
