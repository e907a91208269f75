/**
 * Model-free and linear reference predictors. Every function returns
 * one-step-ahead predictions for indices [testStart, n): the value at
 * position i of the result is the forecast for series[testStart + i],
 * made from true history up to testStart + i - 1.
 */

export function persistenceForecast(
  series: ArrayLike<number>,
  testStart: number,
): Float64Array {
  if (testStart < 1 || testStart >= series.length) {
    throw new RangeError('test region must start after the first sample');
  }
  const out = new Float64Array(series.length - testStart);
  for (let t = testStart; t < series.length; t++) {
    out[t - testStart] = series[t - 1];
  }
  return out;
}

export interface ArSpec {
  /** number of autoregressive lags */
  order: number;
  /** 0 fits levels, 1 fits first differences and re-integrates */
  diff: 0 | 1;
  /** diagonal regularizer keeping the normal equations well-posed */
  ridge?: number;
}

export const DEFAULT_AR: ArSpec = { order: 4, diff: 0, ridge: 1e-9 };

/** Solve A x = b in place via Gaussian elimination with partial pivoting. */
function solveLinearSystem(a: Float64Array[], b: Float64Array): Float64Array {
  const n = b.length;
  for (let col = 0; col < n; col++) {
    let pivot = col;
    for (let row = col + 1; row < n; row++) {
      if (Math.abs(a[row][col]) > Math.abs(a[pivot][col])) pivot = row;
    }
    [a[col], a[pivot]] = [a[pivot], a[col]];
    [b[col], b[pivot]] = [b[pivot], b[col]];
    const lead = a[col][col];
    if (lead === 0) throw new RangeError('singular system in AR fit');
    for (let row = col + 1; row < n; row++) {
      const factor = a[row][col] / lead;
      if (factor === 0) continue;
      for (let k = col; k < n; k++) a[row][k] -= factor * a[col][k];
      b[row] -= factor * b[col];
    }
  }
  const x = new Float64Array(n);
  for (let row = n - 1; row >= 0; row--) {
    let acc = b[row];
    for (let k = row + 1; k < n; k++) acc -= a[row][k] * x[k];
    x[row] = acc / a[row][row];
  }
  return x;
}

/** Ordinary-least-squares AR(p) on levels or first differences. */
export function arForecast(
  series: ArrayLike<number>,
  testStart: number,
  spec: ArSpec = DEFAULT_AR,
): Float64Array {
  const { order, diff } = spec;
  const ridge = spec.ridge ?? 1e-9;
  if (order < 1) throw new RangeError('AR order must be at least 1');
  const y = new Float64Array(series.length - diff);
  for (let t = 0; t < y.length; t++) {
    y[t] = diff === 0 ? series[t] : series[t + 1] - series[t];
  }
  const firstTarget = order;
  const lastTarget = testStart - diff; // exclusive: training stays causal
  if (lastTarget - firstTarget < order + 2) {
    throw new RangeError('not enough history before the test region for the AR fit');
  }

  // normal equations over rows [1, y[t-1], ..., y[t-p]]
  const width = order + 1;
  const gram = Array.from({ length: width }, () => new Float64Array(width));
  const moment = new Float64Array(width);
  const row = new Float64Array(width);
  for (let t = firstTarget; t < lastTarget; t++) {
    row[0] = 1;
    for (let k = 1; k < width; k++) row[k] = y[t - k];
    for (let i = 0; i < width; i++) {
      moment[i] += row[i] * y[t];
      for (let j = 0; j < width; j++) gram[i][j] += row[i] * row[j];
    }
  }
  for (let i = 0; i < width; i++) gram[i][i] += ridge;
  const coeffs = solveLinearSystem(gram, moment);

  const out = new Float64Array(series.length - testStart);
  for (let t = testStart; t < series.length; t++) {
    const ty = t - diff; // index of the modeled value in y
    let yHat = coeffs[0];
    for (let k = 1; k < width; k++) yHat += coeffs[k] * y[ty - k];
    out[t - testStart] = diff === 0 ? yHat : series[t - 1] + yHat;
  }
  return out;
}
