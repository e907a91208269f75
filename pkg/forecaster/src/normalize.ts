/**
 * Column-wise min-max scaling to [0, 1], fitted on the training region only
 * so the held-out tail never leaks into the statistics. A constant column
 * maps to 0 and inverts back to its constant.
 */

export interface Scaler {
  mins: Float64Array;
  spans: Float64Array;
}

export function fitScaler(rows: ArrayLike<number>[], fitCount?: number): Scaler {
  const limit = fitCount ?? rows.length;
  if (limit < 1 || rows.length === 0) {
    throw new RangeError('cannot fit a scaler on an empty matrix');
  }
  const width = rows[0].length;
  const mins = new Float64Array(width).fill(Number.POSITIVE_INFINITY);
  const maxs = new Float64Array(width).fill(Number.NEGATIVE_INFINITY);
  for (let r = 0; r < limit; r++) {
    for (let c = 0; c < width; c++) {
      const value = rows[r][c];
      if (!Number.isFinite(value)) {
        throw new RangeError(`non-finite value in column ${c}, row ${r}`);
      }
      if (value < mins[c]) mins[c] = value;
      if (value > maxs[c]) maxs[c] = value;
    }
  }
  const spans = new Float64Array(width);
  for (let c = 0; c < width; c++) spans[c] = maxs[c] - mins[c];
  return { mins, spans };
}

export function transform(scaler: Scaler, rows: ArrayLike<number>[]): Float64Array[] {
  return rows.map((row) => {
    const out = new Float64Array(row.length);
    for (let c = 0; c < row.length; c++) {
      out[c] = scaler.spans[c] === 0 ? 0 : (row[c] - scaler.mins[c]) / scaler.spans[c];
      if (!Number.isFinite(out[c])) {
        throw new RangeError(`normalization produced a non-finite value in column ${c}`);
      }
    }
    return out;
  });
}

export function inverseTransform(scaler: Scaler, rows: ArrayLike<number>[]): Float64Array[] {
  return rows.map((row) => {
    const out = new Float64Array(row.length);
    for (let c = 0; c < row.length; c++) {
      out[c] = scaler.mins[c] + row[c] * scaler.spans[c];
    }
    return out;
  });
}

/** Scalar helpers for a single target column. */
export function scaleValue(scaler: Scaler, column: number, value: number): number {
  return scaler.spans[column] === 0 ? 0 : (value - scaler.mins[column]) / scaler.spans[column];
}

export function unscaleValue(scaler: Scaler, column: number, value: number): number {
  return scaler.mins[column] + value * scaler.spans[column];
}
