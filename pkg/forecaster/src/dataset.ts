/**
 * Supervised-window construction for one-step-ahead training. Channel 0 of
 * every window is the target series itself; exogenous feature columns (if
 * any) follow. Window i covers rows [i, i + lookback) and its label is the
 * target at row i + lookback.
 */

export interface WindowSet {
  /** flattened [count, lookback, channels] tensor data */
  x: Float64Array;
  y: Float64Array;
  count: number;
  lookback: number;
  channels: number;
  /** row index of the first label; label j belongs to row labelStart + j */
  labelStart: number;
}

export function makeWindows(
  target: ArrayLike<number>,
  features: ArrayLike<number>[] | null,
  lookback: number,
): WindowSet {
  const n = target.length;
  if (lookback < 1) throw new RangeError('lookback must be at least 1');
  if (n <= lookback) {
    throw new RangeError(`series length ${n} leaves no labels after lookback ${lookback}`);
  }
  const exog = features ?? [];
  for (const column of exog) {
    if (column.length !== n) {
      throw new RangeError('feature columns must align with the target length');
    }
  }
  const channels = 1 + exog.length;
  const count = n - lookback;
  const x = new Float64Array(count * lookback * channels);
  const y = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    for (let s = 0; s < lookback; s++) {
      const base = (i * lookback + s) * channels;
      x[base] = target[i + s];
      for (let f = 0; f < exog.length; f++) x[base + 1 + f] = exog[f][i + s];
    }
    y[i] = target[i + lookback];
  }
  return { x, y, count, lookback, channels, labelStart: lookback };
}

/** Chronological 9:1-style split; the tail is the held-out region. */
export function splitCount(count: number, trainSplit: number): number {
  if (!(trainSplit > 0 && trainSplit < 1)) {
    throw new RangeError('train split must lie strictly between 0 and 1');
  }
  const train = Math.floor(count * trainSplit);
  if (train < 1 || train >= count) {
    throw new RangeError(`split ${trainSplit} leaves an empty train or test region`);
  }
  return train;
}
