/**
 * Strict readers for the two published CSV schemas. A file whose header does
 * not match byte-for-byte is rejected; leading `#` comment lines carry the
 * run configuration and are skipped.
 */

export const SWEEP_HEADER =
  "sigma,block_size,strategy,scale_format,mse,mse_over_variance," +
  "clip_mse,round_mse,zero_scale_fraction";

export const HIST_HEADER =
  "region,sigma,block_size,strategy,bin_kind,bin_value,count";

export class SchemaError extends Error {}

export interface SweepRow {
  sigma: number;
  block_size: number;
  strategy: string;
  scale_format: string;
  mse: number;
  mse_over_variance: number;
  clip_mse: number;
  round_mse: number;
  zero_scale_fraction: number;
}

export interface HistRow {
  region: string;
  sigma: number;
  block_size: number;
  strategy: string;
  bin_kind: "entry" | "scale";
  bin_value: number;
  count: number;
}

function stripComments(csv: string): string {
  return csv
    .split("\n")
    .filter((line) => !line.startsWith("#"))
    .join("\n");
}

function parseRows(csv: string, expectedHeader: string): Record<string, string>[] {
  const body = stripComments(csv).trim();
  if (body.length === 0) {
    throw new SchemaError("CSV is empty");
  }
  const headerLine = body.split("\n", 1)[0];
  if (headerLine !== expectedHeader) {
    throw new SchemaError(
      `CSV header mismatch: expected "${expectedHeader}", got "${headerLine}"`,
    );
  }
  // The emitter never quotes fields, so a plain split is a full parser here.
  const fields = expectedHeader.split(",");
  const rows = body
    .split("\n")
    .slice(1)
    .filter((line) => line.length > 0)
    .map((line, i) => {
      const cells = line.split(",");
      if (cells.length !== fields.length) {
        throw new SchemaError(
          `row ${i + 1} has ${cells.length} fields, expected ${fields.length}`,
        );
      }
      return Object.fromEntries(fields.map((f, j) => [f, cells[j]]));
    });
  if (rows.length === 0) {
    throw new SchemaError("CSV contains a header but no data rows");
  }
  return rows;
}

function num(row: Record<string, string>, field: string): number {
  const v = Number(row[field]);
  if (!Number.isFinite(v)) {
    throw new SchemaError(`non-numeric value ${JSON.stringify(row[field])} in ${field}`);
  }
  return v;
}

export function parseSweepCsv(csv: string): SweepRow[] {
  return parseRows(csv, SWEEP_HEADER).map((r) => ({
    sigma: num(r, "sigma"),
    block_size: num(r, "block_size"),
    strategy: r.strategy,
    scale_format: r.scale_format,
    mse: num(r, "mse"),
    mse_over_variance: num(r, "mse_over_variance"),
    clip_mse: num(r, "clip_mse"),
    round_mse: num(r, "round_mse"),
    zero_scale_fraction: num(r, "zero_scale_fraction"),
  }));
}

export function parseHistCsv(csv: string): HistRow[] {
  return parseRows(csv, HIST_HEADER).map((r) => {
    if (r.bin_kind !== "entry" && r.bin_kind !== "scale") {
      throw new SchemaError(`unknown bin_kind ${JSON.stringify(r.bin_kind)}`);
    }
    return {
      region: r.region,
      sigma: num(r, "sigma"),
      block_size: num(r, "block_size"),
      strategy: r.strategy,
      bin_kind: r.bin_kind,
      bin_value: num(r, "bin_value"),
      count: num(r, "count"),
    };
  });
}

/** Panel order following the sweep figure: abs-max, prevent-zero, 4-over-6,
 * the combined recipe, brute force; hierarchical variants after their base. */
const STRATEGY_ORDER = [
  "absmax", "pz", "4o6", "pz+4o6", "brute",
  "absmax+H", "pz+H", "4o6+H", "pz+4o6+H", "brute+H",
  "mxpow2", "mxpow2+H",
];

export function orderedStrategies(strategies: Iterable<string>): string[] {
  const unique = [...new Set(strategies)];
  return unique.sort((a, b) => {
    const ia = STRATEGY_ORDER.indexOf(a);
    const ib = STRATEGY_ORDER.indexOf(b);
    if (ia === -1 && ib === -1) return a.localeCompare(b);
    if (ia === -1) return 1;
    if (ib === -1) return -1;
    return ia - ib;
  });
}
