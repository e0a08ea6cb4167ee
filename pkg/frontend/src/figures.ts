/**
 * Figure data models: pure transformations from parsed CSV rows to the
 * series arrays that get plotted.  No aggregation happens here, so plotted
 * coordinates always equal the CSV values exactly.
 */
import type { ExperimentRow } from "./schema.js";

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export interface Panel {
  metric: "T_total_s" | "accuracy" | "E_total_J";
  axisLabel: string;
  series: Series[];
}

export interface ConsumptionFigure {
  kind: "consumption-panels";
  xLabel: string;
  panels: Panel[];
}

export interface ObjectiveFigure {
  kind: "objective-curve";
  xLabel: string;
  yLabel: string;
  series: Series[];
}

export type Figure = ConsumptionFigure | ObjectiveFigure;

const PANEL_SPECS: Array<{ metric: Panel["metric"]; axisLabel: string }> = [
  { metric: "T_total_s", axisLabel: "total time (s)" },
  { metric: "accuracy", axisLabel: "accuracy (1 - mean error)" },
  { metric: "E_total_J", axisLabel: "total energy (J)" },
];

function fmt(value: number): string {
  return Number(value.toPrecision(3)).toString();
}

/** Group rows into one series per (method, weight setting), in first-appearance order. */
function groupRows(rows: ExperimentRow[]): Map<string, ExperimentRow[]> {
  const groups = new Map<string, ExperimentRow[]>();
  for (const row of rows) {
    const key = `${row.method} c=(${fmt(row.c1)},${fmt(row.c2)},${fmt(row.c3)}) w=(${fmt(
      row.w1,
    )},${fmt(row.w2)})`;
    const bucket = groups.get(key);
    if (bucket) {
      bucket.push(row);
    } else {
      groups.set(key, [row]);
    }
  }
  return groups;
}

export function buildConsumptionPanels(
  rows: ExperimentRow[],
  warn: (message: string) => void = console.warn,
): ConsumptionFigure {
  const groups = groupRows(rows);
  if (groups.size === 0) {
    warn("consumption-panels: no data rows; rendering empty panels");
  }
  const panels = PANEL_SPECS.map(({ metric, axisLabel }) => ({
    metric,
    axisLabel,
    series: [...groups.entries()].map(([label, group]) => ({
      label,
      x: group.map((r) => r.swept_value),
      y: group.map((r) => r[metric]),
    })),
  }));
  return { kind: "consumption-panels", xLabel: "edge step budget", panels };
}

export function buildObjectiveCurve(
  inputs: Array<{ label: string; rows: ExperimentRow[] }>,
  warn: (message: string) => void = console.warn,
): ObjectiveFigure {
  const series = inputs.map(({ label, rows }) => {
    if (rows.length === 0) {
      warn(`objective-curve: series "${label}" is empty`);
    }
    return {
      label,
      x: rows.map((r) => r.swept_value),
      y: rows.map((r) => r.objective),
    };
  });
  return {
    kind: "objective-curve",
    xLabel: "edge step budget",
    yLabel: "objective",
    series,
  };
}
