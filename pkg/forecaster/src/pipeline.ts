/**
 * End-to-end one-step-ahead forecasters sharing a common geometry: windows
 * of `lookback` rows, a chronological train/held-out split, min-max
 * normalization fitted on the training region, and evaluation on the
 * de-normalized held-out tail.
 *
 * The wavelet variant splits the target into three detail components and
 * one approximation component (which sum to the original series), trains
 * one convolutional-recurrent predictor per component, and adds the four
 * component forecasts back together.
 */
import * as tf from '@tensorflow/tfjs';
import { bandSignals, type WaveletFamily } from './dwt.js';
import { makeWindows, splitCount } from './dataset.js';
import { evaluate, type ForecastMetrics } from './metrics.js';
import { fitScaler, scaleValue, unscaleValue, type Scaler } from './normalize.js';
import {
  buildCnnLstm,
  buildLstm,
  predictRange,
  trainOneStep,
  withDefaults,
  type ForecastModelSpec,
} from './models.js';

export interface HistoryMatrix {
  /** exogenous columns (weather channels …), each aligned with `power` */
  features: ArrayLike<number>[];
  power: ArrayLike<number>;
}

export interface PipelineResult {
  /** de-normalized one-step-ahead predictions for the held-out tail */
  predictions: Float64Array;
  actuals: Float64Array;
  metrics: ForecastMetrics;
  /** index into the input series of predictions[0] */
  testStart: number;
}

interface Geometry {
  windowCount: number;
  trainCount: number;
  testStart: number;
}

function geometry(length: number, spec: ForecastModelSpec): Geometry {
  const windowCount = length - spec.lookback;
  if (windowCount < 4) {
    throw new RangeError(
      `history of length ${length} is too short for lookback ${spec.lookback}`,
    );
  }
  const trainCount = splitCount(windowCount, spec.trainSplit);
  return { windowCount, trainCount, testStart: spec.lookback + trainCount };
}

/** Normalize target+features on the pre-test region only, never the tail. */
function fitColumns(
  target: ArrayLike<number>,
  features: ArrayLike<number>[],
  fitRows: number,
): { scaler: Scaler; targetScaled: Float64Array; featuresScaled: Float64Array[] } {
  const n = target.length;
  const width = 1 + features.length;
  const rows: Float64Array[] = [];
  for (let r = 0; r < n; r++) {
    const row = new Float64Array(width);
    row[0] = target[r];
    for (let c = 0; c < features.length; c++) row[1 + c] = features[c][r];
    rows.push(row);
  }
  const scaler = fitScaler(rows, fitRows);
  const targetScaled = new Float64Array(n);
  const featuresScaled = features.map(() => new Float64Array(n));
  for (let r = 0; r < n; r++) {
    targetScaled[r] = scaleValue(scaler, 0, rows[r][0]);
    for (let c = 0; c < features.length; c++) {
      featuresScaled[c][r] = scaleValue(scaler, 1 + c, rows[r][1 + c]);
    }
    for (let c = 0; c < width; c++) {
      const scaled = c === 0 ? targetScaled[r] : featuresScaled[c - 1][r];
      if (!Number.isFinite(scaled)) {
        throw new RangeError(`normalization produced a non-finite value at row ${r}`);
      }
    }
  }
  return { scaler, targetScaled, featuresScaled };
}

type Builder = (channels: number, spec: ForecastModelSpec) => tf.Sequential;

/**
 * Train on the chronological first `trainSplit` of the windows, then
 * predict every window from index `predictFrom` on. `predictFrom = 0`
 * covers the training region too (in-sample), which file emission wants;
 * evaluation always uses the default out-of-sample tail.
 */
async function trainedForecast(
  target: ArrayLike<number>,
  features: ArrayLike<number>[],
  spec: ForecastModelSpec,
  build: Builder,
  predictFrom?: number,
): Promise<Float64Array> {
  const { trainCount, testStart } = geometry(target.length, spec);
  const { scaler, targetScaled, featuresScaled } = fitColumns(target, features, testStart);
  const windows = makeWindows(targetScaled, featuresScaled, spec.lookback);
  const model = build(windows.channels, spec);
  try {
    await trainOneStep(model, windows, trainCount, spec);
    const raw = predictRange(model, windows, predictFrom ?? trainCount);
    const out = new Float64Array(raw.length);
    for (let i = 0; i < raw.length; i++) out[i] = unscaleValue(scaler, 0, raw[i]);
    return out;
  } finally {
    model.dispose();
  }
}

function finish(
  predictions: Float64Array,
  power: ArrayLike<number>,
  testStart: number,
): PipelineResult {
  const actuals = new Float64Array(power.length - testStart);
  for (let i = 0; i < actuals.length; i++) actuals[i] = power[testStart + i];
  return { predictions, actuals, metrics: evaluate(predictions, actuals), testStart };
}

/** Plain recurrent baseline on the raw series. */
export async function lstmForecast(
  history: HistoryMatrix,
  overrides: Partial<ForecastModelSpec> = {},
): Promise<PipelineResult> {
  const spec = withDefaults(overrides);
  const { testStart } = geometry(history.power.length, spec);
  const predictions = await trainedForecast(history.power, history.features, spec, buildLstm);
  return finish(predictions, history.power, testStart);
}

/** Convolutional-recurrent model on the raw series (no wavelet split). */
export async function cnnLstmForecast(
  history: HistoryMatrix,
  overrides: Partial<ForecastModelSpec> = {},
): Promise<PipelineResult> {
  const spec = withDefaults(overrides);
  const { testStart } = geometry(history.power.length, spec);
  const predictions = await trainedForecast(
    history.power,
    history.features,
    spec,
    buildCnnLstm,
  );
  return finish(predictions, history.power, testStart);
}

/** One convolutional-recurrent predictor per wavelet component, summed. */
export async function waveletCnnLstmForecast(
  history: HistoryMatrix,
  overrides: Partial<ForecastModelSpec> = {},
  family: WaveletFamily = 'db4',
): Promise<PipelineResult> {
  const spec = withDefaults(overrides);
  const { testStart } = geometry(history.power.length, spec);
  const summed = await summedBandForecast(history, spec, family);
  return finish(summed, history.power, testStart);
}

async function summedBandForecast(
  history: HistoryMatrix,
  spec: ForecastModelSpec,
  family: WaveletFamily,
  predictFrom?: number,
): Promise<Float64Array> {
  const components = bandSignals(history.power, family);
  const bands = [components.d1, components.d2, components.d3, components.a3];
  let summed: Float64Array | null = null;
  for (let b = 0; b < bands.length; b++) {
    const bandSpec = { ...spec, seed: spec.seed + 101 * b };
    const bandForecast = await trainedForecast(
      bands[b],
      history.features,
      bandSpec,
      buildCnnLstm,
      predictFrom,
    );
    if (summed === null) summed = new Float64Array(bandForecast.length);
    for (let i = 0; i < summed.length; i++) summed[i] += bandForecast[i];
  }
  return summed!;
}

export type SeriesModel = 'wavelet' | 'cnnlstm' | 'lstm';

export interface SeriesForecast {
  /** predictions[i] is the one-step-ahead value for series index predStart + i */
  predictions: Float64Array;
  predStart: number;
}

/**
 * One-step-ahead predictions across every window of the series, trained on
 * the chronological first `trainSplit` only. The head of the range is
 * therefore in-sample; callers that need a clean evaluation should use the
 * `*Forecast` pipelines, which stay on the held-out tail.
 */
export async function forecastSeries(
  target: ArrayLike<number>,
  features: ArrayLike<number>[],
  model: SeriesModel,
  overrides: Partial<ForecastModelSpec> = {},
  family: WaveletFamily = 'db4',
): Promise<SeriesForecast> {
  const spec = withDefaults(overrides);
  geometry(target.length, spec); // validates length before any training
  const history: HistoryMatrix = { features, power: target };
  const predictions =
    model === 'wavelet'
      ? await summedBandForecast(history, spec, family, 0)
      : await trainedForecast(
          target,
          features,
          spec,
          model === 'cnnlstm' ? buildCnnLstm : buildLstm,
          0,
        );
  return { predictions, predStart: spec.lookback };
}
