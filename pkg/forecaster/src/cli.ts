#!/usr/bin/env node
/**
 * Command-line front end.
 *
 *   forecaster predict  --input day.csv --out day_fc.csv [--model wavelet]
 *                       [--column pv_3 --column wind_27] [--epochs 8] ...
 *   forecaster backtest --input history.csv [--model wavelet] ...
 *
 * `predict` appends fc_* columns to a feeder profile; `backtest` trains on
 * a weather/power history and prints held-out metrics (with persistence
 * and AR reference rows) as JSON on stdout.
 *
 * Exit codes: 0 success, 1 runtime failure, 2 usage error.
 */
import { readFileSync, writeFileSync } from 'node:fs';
import { parseArgs } from 'node:util';
import {
  CsvSchemaError,
  dropForecastColumns,
  emitForecastProfile,
  loadHistoryCsv,
  loadProfileCsv,
} from './csv.js';
import { PROFILE_MODELS, profileForecasts, type ProfileModel } from './profile.js';
import { cnnLstmForecast, lstmForecast, waveletCnnLstmForecast } from './pipeline.js';
import { arForecast, persistenceForecast, DEFAULT_AR } from './baselines.js';
import { evaluate } from './metrics.js';
import type { ForecastModelSpec } from './models.js';
import type { WaveletFamily } from './dwt.js';

const EXIT_RUNTIME = 1;
const EXIT_USAGE = 2;

class UsageError extends Error {}

interface CommonOptions {
  input: string;
  model: ProfileModel;
  spec: Partial<ForecastModelSpec>;
  family: WaveletFamily;
}

const OPTION_SPEC = {
  input: { type: 'string' as const },
  out: { type: 'string' as const },
  column: { type: 'string' as const, multiple: true },
  model: { type: 'string' as const, default: 'wavelet' },
  family: { type: 'string' as const, default: 'db4' },
  epochs: { type: 'string' as const },
  lookback: { type: 'string' as const },
  units: { type: 'string' as const },
  seed: { type: 'string' as const },
};

function parseCommon(values: Record<string, unknown>): CommonOptions {
  const input = values.input as string | undefined;
  if (!input) throw new UsageError('--input is required');
  const model = values.model as ProfileModel;
  if (!PROFILE_MODELS.includes(model)) {
    throw new UsageError(`--model must be one of ${PROFILE_MODELS.join(', ')}`);
  }
  const family = values.family as WaveletFamily;
  if (!['haar', 'db2', 'db4'].includes(family)) {
    throw new UsageError('--family must be haar, db2 or db4');
  }
  const spec: Partial<ForecastModelSpec> = {};
  const numeric = (name: 'epochs' | 'lookback' | 'units' | 'seed'): number | undefined => {
    const raw = values[name] as string | undefined;
    if (raw === undefined) return undefined;
    const parsed = Number(raw);
    if (!Number.isFinite(parsed) || parsed <= 0 || parsed % 1 !== 0) {
      throw new UsageError(`--${name} expects a positive integer, got "${raw}"`);
    }
    return parsed;
  };
  const epochs = numeric('epochs');
  if (epochs !== undefined) spec.epochs = epochs;
  const lookback = numeric('lookback');
  if (lookback !== undefined) spec.lookback = lookback;
  const units = numeric('units');
  if (units !== undefined) spec.lstmUnits = units;
  const seed = numeric('seed');
  if (seed !== undefined) spec.seed = seed;
  return { input, model, spec, family };
}

async function runPredict(values: Record<string, unknown>): Promise<void> {
  const common = parseCommon(values);
  const out = values.out as string | undefined;
  if (!out) throw new UsageError('predict requires --out');
  // existing fc_ columns are replaced by the fresh forecast
  const profile = dropForecastColumns(loadProfileCsv(readFileSync(common.input, 'utf8')));
  const requested = (values.column as string[] | undefined) ?? profile.deviceColumns;
  if (requested.length === 0) {
    throw new UsageError('profile has no generation columns to forecast');
  }
  const forecasts = await profileForecasts(profile, requested, {
    model: common.model,
    spec: common.spec,
    family: common.family,
  });
  writeFileSync(out, emitForecastProfile(profile, forecasts));
  process.stdout.write(
    JSON.stringify({ input: common.input, out, model: common.model, columns: requested }, null, 2) +
      '\n',
  );
}

async function runBacktest(values: Record<string, unknown>): Promise<void> {
  const common = parseCommon(values);
  const history = loadHistoryCsv(readFileSync(common.input, 'utf8'));
  const matrix = { features: history.features, power: history.power };
  const result =
    common.model === 'wavelet'
      ? await waveletCnnLstmForecast(matrix, common.spec, common.family)
      : common.model === 'cnnlstm'
        ? await cnnLstmForecast(matrix, common.spec)
        : common.model === 'lstm'
          ? await lstmForecast(matrix, common.spec)
          : null;
  if (result === null) {
    throw new UsageError('backtest compares learned models; use wavelet, cnnlstm or lstm');
  }
  const persistence = evaluate(
    persistenceForecast(history.power, result.testStart),
    result.actuals,
  );
  const ar = evaluate(
    arForecast(history.power, result.testStart, DEFAULT_AR),
    result.actuals,
  );
  const report = {
    model: common.model,
    testStart: result.testStart,
    heldOut: result.actuals.length,
    metrics: result.metrics,
    baselines: { persistence, ar },
  };
  process.stdout.write(JSON.stringify(report, null, 2) + '\n');
}

export async function main(argv: string[]): Promise<number> {
  let command: string | undefined;
  let values: Record<string, unknown>;
  try {
    const parsed = parseArgs({
      args: argv,
      options: OPTION_SPEC,
      allowPositionals: true,
    });
    command = parsed.positionals[0];
    values = parsed.values;
  } catch (error) {
    process.stderr.write(`error: ${(error as Error).message}\n`);
    return EXIT_USAGE;
  }
  try {
    if (command === 'predict') {
      await runPredict(values);
    } else if (command === 'backtest') {
      await runBacktest(values);
    } else {
      throw new UsageError(`unknown command "${command ?? ''}" (use predict or backtest)`);
    }
    return 0;
  } catch (error) {
    const usage =
      error instanceof UsageError ||
      error instanceof CsvSchemaError ||
      (error as NodeJS.ErrnoException).code === 'ENOENT';
    process.stderr.write(`error: ${(error as Error).message}\n`);
    return usage ? EXIT_USAGE : EXIT_RUNTIME;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
