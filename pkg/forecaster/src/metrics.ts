/** Forecast error measures used to compare predictors on a held-out split. */

export interface ForecastMetrics {
  mse: number;
  /**
   * Mean absolute percent error, in percent. Points whose |actual| falls
   * below 1% of the series maximum are excluded so overnight zeros cannot
   * blow up the ratio; `excluded` reports how many were skipped. If every
   * point is excluded the MAPE is NaN (undefined, by documentation).
   */
  mape: number;
  excluded: number;
}

export const MAPE_FLOOR_FRACTION = 0.01;

export function evaluate(
  predicted: ArrayLike<number>,
  actual: ArrayLike<number>,
): ForecastMetrics {
  if (predicted.length !== actual.length) {
    throw new RangeError(
      `predicted length ${predicted.length} != actual length ${actual.length}`,
    );
  }
  if (predicted.length === 0) {
    throw new RangeError('cannot evaluate empty series');
  }
  let peak = 0;
  for (let i = 0; i < actual.length; i++) {
    peak = Math.max(peak, Math.abs(actual[i]));
  }
  const floor = peak * MAPE_FLOOR_FRACTION;
  let squared = 0;
  let percent = 0;
  let counted = 0;
  for (let i = 0; i < actual.length; i++) {
    const error = predicted[i] - actual[i];
    squared += error * error;
    if (Math.abs(actual[i]) >= floor && actual[i] !== 0) {
      percent += Math.abs(error / actual[i]);
      counted += 1;
    }
  }
  return {
    mse: squared / actual.length,
    mape: counted === 0 ? Number.NaN : (percent / counted) * 100,
    excluded: actual.length - counted,
  };
}
