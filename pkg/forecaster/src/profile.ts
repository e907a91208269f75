/**
 * Forecast generation columns of a feeder profile. The produced map feeds
 * `emitForecastProfile`: entry t of each series is the prediction for row
 * t+1, with the final row falling back to its own value (nothing follows
 * it to predict). Rows before the first model-covered index fall back to
 * persistence as well, so every row carries a usable forecast.
 */
import type { ProfileTable } from './csv.js';
import { arForecast, DEFAULT_AR, type ArSpec } from './baselines.js';
import { forecastSeries, type SeriesModel } from './pipeline.js';
import type { ForecastModelSpec } from './models.js';
import type { WaveletFamily } from './dwt.js';

export type ProfileModel = SeriesModel | 'ar' | 'persistence';

export const PROFILE_MODELS: ProfileModel[] = [
  'wavelet',
  'cnnlstm',
  'lstm',
  'ar',
  'persistence',
];

export interface ProfileForecastOptions {
  model: ProfileModel;
  spec?: Partial<ForecastModelSpec>;
  ar?: ArSpec;
  family?: WaveletFamily;
}

function withPersistenceFallback(
  series: Float64Array,
  predictions: ArrayLike<number>,
  predStart: number,
): Float64Array {
  const n = series.length;
  const out = new Float64Array(n);
  for (let t = 0; t < n; t++) {
    const ahead = t + 1;
    const covered = ahead >= predStart && ahead - predStart < predictions.length;
    out[t] = covered ? predictions[ahead - predStart] : series[t];
  }
  return out;
}

export async function profileForecasts(
  profile: ProfileTable,
  columns: string[],
  options: ProfileForecastOptions,
): Promise<Map<string, Float64Array>> {
  const out = new Map<string, Float64Array>();
  for (const column of columns) {
    const series = profile.series.get(column);
    if (series === undefined || !profile.deviceColumns.includes(column)) {
      throw new RangeError(`profile has no generation column named "${column}"`);
    }
    out.set(column, await forecastColumn(series, options));
  }
  return out;
}

async function forecastColumn(
  series: Float64Array,
  options: ProfileForecastOptions,
): Promise<Float64Array> {
  switch (options.model) {
    case 'persistence':
      return withPersistenceFallback(series, [], Number.POSITIVE_INFINITY);
    case 'ar': {
      const spec = options.ar ?? DEFAULT_AR;
      const start = 2 * spec.order + 2 + spec.diff;
      const predictions = arForecast(series, start, spec);
      return withPersistenceFallback(series, predictions, start);
    }
    default: {
      const { predictions, predStart } = await forecastSeries(
        series,
        [],
        options.model,
        options.spec ?? {},
        options.family ?? 'db4',
      );
      return withPersistenceFallback(series, predictions, predStart);
    }
  }
}
