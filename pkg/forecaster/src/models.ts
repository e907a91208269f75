/**
 * tfjs sequence models. Every initializer and the dropout mask are seeded
 * and training never shuffles, so two fits from the same spec produce
 * bit-identical weights and metrics on the CPU backend.
 */
import * as tf from '@tensorflow/tfjs';
import type { WindowSet } from './dataset.js';

tf.enableProdMode();

export interface ForecastModelSpec {
  convFilters: number;
  convKernel: number;
  convLayers: number;
  poolSize: number;
  lstmUnits: number;
  lstmLayers: number;
  dropout: number;
  denseUnits: number;
  lookback: number;
  epochs: number;
  batchSize: number;
  learningRate: number;
  /** chronological train fraction; the remainder is held out */
  trainSplit: number;
  seed: number;
}

export const DEFAULT_SPEC: ForecastModelSpec = {
  convFilters: 16,
  convKernel: 4,
  convLayers: 2,
  poolSize: 2,
  lstmUnits: 150,
  lstmLayers: 3,
  dropout: 0.5,
  denseUnits: 50,
  lookback: 24,
  epochs: 40,
  batchSize: 32,
  learningRate: 1e-3,
  trainSplit: 0.9,
  seed: 7,
};

export function withDefaults(overrides: Partial<ForecastModelSpec> = {}): ForecastModelSpec {
  return { ...DEFAULT_SPEC, ...overrides };
}

/** Hand each layer its own derived seed so rebuilt models match exactly. */
class SeedSequence {
  private next: number;
  constructor(seed: number) {
    this.next = (seed >>> 0) + 1;
  }
  take(): number {
    return this.next++;
  }
}

function denseHead(model: tf.Sequential, spec: ForecastModelSpec, seeds: SeedSequence): void {
  model.add(tf.layers.dropout({ rate: spec.dropout, seed: seeds.take() }));
  model.add(
    tf.layers.dense({
      units: spec.denseUnits,
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: seeds.take() }),
    }),
  );
  model.add(
    tf.layers.dense({
      units: 1,
      kernelInitializer: tf.initializers.glorotUniform({ seed: seeds.take() }),
    }),
  );
}

function addLstmStack(
  model: tf.Sequential,
  spec: ForecastModelSpec,
  seeds: SeedSequence,
  inputShape?: [number, number],
): void {
  for (let layer = 0; layer < spec.lstmLayers; layer++) {
    model.add(
      tf.layers.lstm({
        units: spec.lstmUnits,
        returnSequences: layer < spec.lstmLayers - 1,
        kernelInitializer: tf.initializers.glorotUniform({ seed: seeds.take() }),
        recurrentInitializer: tf.initializers.glorotUniform({ seed: seeds.take() }),
        ...(layer === 0 && inputShape ? { inputShape } : {}),
      }),
    );
  }
}

/** Convolution front end, pooled, feeding the recurrent stack. */
export function buildCnnLstm(channels: number, spec: ForecastModelSpec): tf.Sequential {
  const seeds = new SeedSequence(spec.seed);
  const model = tf.sequential();
  for (let layer = 0; layer < spec.convLayers; layer++) {
    model.add(
      tf.layers.conv1d({
        filters: spec.convFilters,
        kernelSize: spec.convKernel,
        padding: 'same',
        activation: 'relu',
        kernelInitializer: tf.initializers.glorotUniform({ seed: seeds.take() }),
        ...(layer === 0 ? { inputShape: [spec.lookback, channels] } : {}),
      }),
    );
  }
  model.add(tf.layers.maxPooling1d({ poolSize: spec.poolSize }));
  addLstmStack(model, spec, seeds);
  denseHead(model, spec, seeds);
  return model;
}

/** Recurrent stack only, the plain baseline. */
export function buildLstm(channels: number, spec: ForecastModelSpec): tf.Sequential {
  const seeds = new SeedSequence(spec.seed);
  const model = tf.sequential();
  addLstmStack(model, spec, seeds, [spec.lookback, channels]);
  denseHead(model, spec, seeds);
  return model;
}

export async function trainOneStep(
  model: tf.Sequential,
  windows: WindowSet,
  trainCount: number,
  spec: ForecastModelSpec,
): Promise<void> {
  model.compile({ optimizer: tf.train.adam(spec.learningRate), loss: 'meanSquaredError' });
  // tfjs tensors take Float32Array; inputs are normalized so the cast is safe
  const x = tf.tensor3d(
    Float32Array.from(windows.x.subarray(0, trainCount * windows.lookback * windows.channels)),
    [trainCount, windows.lookback, windows.channels],
  );
  const y = tf.tensor2d(Float32Array.from(windows.y.subarray(0, trainCount)), [trainCount, 1]);
  try {
    await model.fit(x, y, {
      epochs: spec.epochs,
      batchSize: spec.batchSize,
      shuffle: false,
      verbose: 0,
    });
  } finally {
    x.dispose();
    y.dispose();
  }
}

/** One-step predictions for window indices [from, windows.count). */
export function predictRange(
  model: tf.Sequential,
  windows: WindowSet,
  from: number,
): Float64Array {
  const count = windows.count - from;
  const x = tf.tensor3d(
    Float32Array.from(
      windows.x.subarray(
        from * windows.lookback * windows.channels,
        windows.count * windows.lookback * windows.channels,
      ),
    ),
    [count, windows.lookback, windows.channels],
  );
  try {
    const out = model.predict(x) as tf.Tensor;
    const values = out.dataSync();
    out.dispose();
    return Float64Array.from(values);
  } finally {
    x.dispose();
  }
}
