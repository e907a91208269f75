export {
  bandEnergy,
  bandSignals,
  decompose,
  reconstruct,
  TooShortSeriesError,
  DECOMPOSITION_STAGES,
  type BandSignals,
  type WaveletBands,
  type WaveletFamily,
} from './dwt.js';
export {
  fitScaler,
  inverseTransform,
  scaleValue,
  transform,
  unscaleValue,
  type Scaler,
} from './normalize.js';
export { evaluate, MAPE_FLOOR_FRACTION, type ForecastMetrics } from './metrics.js';
export { arForecast, persistenceForecast, DEFAULT_AR, type ArSpec } from './baselines.js';
export { makeWindows, splitCount, type WindowSet } from './dataset.js';
export {
  buildCnnLstm,
  buildLstm,
  DEFAULT_SPEC,
  withDefaults,
  type ForecastModelSpec,
} from './models.js';
export {
  cnnLstmForecast,
  forecastSeries,
  lstmForecast,
  waveletCnnLstmForecast,
  type HistoryMatrix,
  type PipelineResult,
  type SeriesForecast,
  type SeriesModel,
} from './pipeline.js';
export {
  CsvSchemaError,
  dropForecastColumns,
  emitForecastProfile,
  loadHistoryCsv,
  loadProfileCsv,
  type HistoryTable,
  type ProfileTable,
} from './csv.js';
export { profileForecasts, PROFILE_MODELS, type ProfileModel } from './profile.js';
export { smoothSignal, syntheticHistory, type SyntheticHistory } from './synthetic.js';
