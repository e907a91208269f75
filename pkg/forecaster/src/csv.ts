/**
 * CSV plumbing for the two file contracts this package touches:
 *
 * - feeder *profiles*: `timestamp` first, a `load_scale` column, per-device
 *   generation columns (`pv_<bus>`, `wind_<bus>`), optional `fc_`-prefixed
 *   forecast columns. Emitted forecasts append `fc_` columns while leaving
 *   every original cell byte-for-byte intact, so the result feeds straight
 *   back into the feeder tooling.
 * - *history* tables for training: `timestamp` plus a `power` column; any
 *   other numeric columns ride along as exogenous features.
 */
import Papa from 'papaparse';

export class CsvSchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'CsvSchemaError';
  }
}

interface ParsedTable {
  header: string[];
  rows: string[][];
}

function parseTable(text: string): ParsedTable {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new CsvSchemaError(`malformed CSV: ${first.message} (row ${first.row})`);
  }
  const grid = parsed.data;
  if (grid.length < 2) {
    throw new CsvSchemaError('CSV needs a header row and at least one data row');
  }
  const header = grid[0].map((name) => name.trim());
  const rows = grid.slice(1);
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new CsvSchemaError(
        `row has ${row.length} fields, header has ${header.length}`,
      );
    }
  }
  return { header, rows };
}

function numericColumn(table: ParsedTable, column: string): Float64Array {
  const index = table.header.indexOf(column);
  const out = new Float64Array(table.rows.length);
  for (let r = 0; r < table.rows.length; r++) {
    const value = Number(table.rows[r][index]);
    if (!Number.isFinite(value)) {
      throw new CsvSchemaError(
        `column "${column}" row ${r + 2}: "${table.rows[r][index]}" is not a number`,
      );
    }
    out[r] = value;
  }
  return out;
}

export interface ProfileTable {
  header: string[];
  /** raw text rows, preserved verbatim for re-emission */
  rows: string[][];
  timestamps: string[];
  /** generation columns only (pv_ and wind_, without the fc_ prefix) */
  deviceColumns: string[];
  series: Map<string, Float64Array>;
}

export function loadProfileCsv(text: string): ProfileTable {
  const table = parseTable(text);
  if (table.header[0] !== 'timestamp') {
    throw new CsvSchemaError(`first profile column must be "timestamp", got ${table.header[0]}`);
  }
  if (!table.header.includes('load_scale')) {
    throw new CsvSchemaError('profile is missing the load_scale column');
  }
  const deviceColumns = table.header.filter(
    (name) => name.startsWith('pv_') || name.startsWith('wind_'),
  );
  const series = new Map<string, Float64Array>();
  for (const name of table.header.slice(1)) {
    series.set(name, numericColumn(table, name));
  }
  const timestampIndex = 0;
  const timestamps = table.rows.map((row) => row[timestampIndex]);
  return { header: table.header, rows: table.rows, timestamps, deviceColumns, series };
}

/** Remove existing fc_ columns so a profile can be re-forecast cleanly. */
export function dropForecastColumns(profile: ProfileTable): ProfileTable {
  const keep = profile.header
    .map((name, index) => [name, index] as const)
    .filter(([name]) => !name.startsWith('fc_'));
  if (keep.length === profile.header.length) return profile;
  const indices = keep.map(([, index]) => index);
  return {
    header: keep.map(([name]) => name),
    rows: profile.rows.map((row) => indices.map((index) => row[index])),
    timestamps: profile.timestamps,
    deviceColumns: profile.deviceColumns,
    series: new Map([...profile.series].filter(([name]) => !name.startsWith('fc_'))),
  };
}

export interface HistoryTable {
  timestamps: string[];
  featureNames: string[];
  features: Float64Array[];
  power: Float64Array;
}

export function loadHistoryCsv(text: string): HistoryTable {
  const table = parseTable(text);
  if (!table.header.includes('timestamp')) {
    throw new CsvSchemaError('history is missing the timestamp column');
  }
  if (!table.header.includes('power')) {
    throw new CsvSchemaError('history is missing the power column');
  }
  const featureNames = table.header.filter(
    (name) => name !== 'timestamp' && name !== 'power',
  );
  const timestampIndex = table.header.indexOf('timestamp');
  return {
    timestamps: table.rows.map((row) => row[timestampIndex]),
    featureNames,
    features: featureNames.map((name) => numericColumn(table, name)),
    power: numericColumn(table, 'power'),
  };
}

/**
 * Append forecast columns to a profile. `forecasts` maps a device column
 * name to its full-length forecast series: entry t is the prediction for
 * step t+1, which is the convention the feeder tooling reads. Values are
 * clamped at zero because generation columns reject negatives.
 */
export function emitForecastProfile(
  profile: ProfileTable,
  forecasts: Map<string, ArrayLike<number>>,
): string {
  const names = [...forecasts.keys()];
  for (const name of names) {
    if (!profile.deviceColumns.includes(name)) {
      throw new CsvSchemaError(`no generation column ${name} to forecast`);
    }
    if (profile.header.includes(`fc_${name}`)) {
      throw new CsvSchemaError(
        `profile already has fc_${name}; drop forecast columns before re-emitting`,
      );
    }
    const series = forecasts.get(name)!;
    if (series.length !== profile.rows.length) {
      throw new CsvSchemaError(
        `forecast for ${name} has ${series.length} rows, profile has ${profile.rows.length}`,
      );
    }
  }
  // keep fc_ columns in the same order the base columns appear
  const ordered = profile.deviceColumns.filter((name) => forecasts.has(name));
  const header = [...profile.header, ...ordered.map((name) => `fc_${name}`)];
  const lines = [header.join(',')];
  for (let r = 0; r < profile.rows.length; r++) {
    const extra = ordered.map((name) => formatValue(Math.max(0, forecasts.get(name)![r])));
    lines.push([...profile.rows[r], ...extra].join(','));
  }
  return lines.join('\n') + '\n';
}

function formatValue(value: number): string {
  if (!Number.isFinite(value)) {
    throw new CsvSchemaError('forecast series contains a non-finite value');
  }
  return value.toFixed(6).replace(/0+$/, '').replace(/\.$/, '.0');
}
