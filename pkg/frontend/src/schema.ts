/**
 * Experiment CSV schema: the exact header contract shared with the solver's
 * sweep harness, plus typed row parsing.
 */
import Papa from "papaparse";

export const EXPECTED_HEADER = [
  "method",
  "seed",
  "swept_param",
  "swept_value",
  "c1",
  "c2",
  "c3",
  "w1",
  "w2",
  "objective",
  "T_total_s",
  "accuracy",
  "E_total_J",
  "U_total",
  "offloaded_count",
  "iter_outer",
  "iter_inner",
  "wall_ms",
  "status",
] as const;

export type ColumnName = (typeof EXPECTED_HEADER)[number];

export interface ExperimentRow {
  method: string;
  seed: number;
  swept_param: string;
  swept_value: number;
  c1: number;
  c2: number;
  c3: number;
  w1: number;
  w2: number;
  objective: number;
  T_total_s: number;
  accuracy: number;
  E_total_J: number;
  U_total: number;
  offloaded_count: number;
  iter_outer: number;
  iter_inner: number;
  wall_ms: number;
  status: string;
}

export class SchemaError extends Error {
  constructor(message: string, readonly column?: string) {
    super(message);
    this.name = "SchemaError";
  }
}

const STRING_COLUMNS = new Set<ColumnName>(["method", "swept_param", "status"]);

/** Validate the header and parse every data row with numeric conversion. */
export function parseExperimentsCsv(text: string, source = "<csv>"): ExperimentRow[] {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${source}: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new SchemaError(`${source}: empty file`);
  }
  const header = rows[0];
  for (let i = 0; i < EXPECTED_HEADER.length; i++) {
    if (header[i] !== EXPECTED_HEADER[i]) {
      throw new SchemaError(
        `${source}: missing or misplaced column "${EXPECTED_HEADER[i]}" ` +
          `(position ${i} holds "${header[i] ?? "<none>"}")`,
        EXPECTED_HEADER[i],
      );
    }
  }
  if (header.length !== EXPECTED_HEADER.length) {
    throw new SchemaError(
      `${source}: unexpected extra column "${header[EXPECTED_HEADER.length]}"`,
      header[EXPECTED_HEADER.length],
    );
  }

  return rows.slice(1).map((fields, index) => {
    if (fields.length !== EXPECTED_HEADER.length) {
      throw new SchemaError(
        `${source}: row ${index + 2} has ${fields.length} fields, ` +
          `expected ${EXPECTED_HEADER.length}`,
      );
    }
    const row: Record<string, string | number> = {};
    EXPECTED_HEADER.forEach((name, i) => {
      if (STRING_COLUMNS.has(name)) {
        row[name] = fields[i];
      } else {
        const value = Number(fields[i]);
        if (Number.isNaN(value) && fields[i] !== "nan") {
          throw new SchemaError(
            `${source}: row ${index + 2} column "${name}" is not numeric: "${fields[i]}"`,
            name,
          );
        }
        row[name] = value;
      }
    });
    return row as unknown as ExperimentRow;
  });
}
