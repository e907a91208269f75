/**
 * Three-stage discrete wavelet transform with periodic boundary handling.
 *
 * The analysis operator is orthogonal for any even signal length (odd
 * lengths are padded by repeating the last sample, and the pad is dropped
 * again on reconstruction), so decompose → reconstruct is an identity up
 * to floating-point rounding. Band naming follows the usual convention:
 * d1 is the finest detail, a3 the coarse approximation.
 */

export type WaveletFamily = 'haar' | 'db2' | 'db4';

/** Orthonormal scaling filters; the detail filter is the alternating flip. */
const SCALING_FILTERS: Record<WaveletFamily, readonly number[]> = {
  haar: [Math.SQRT1_2, Math.SQRT1_2],
  db2: [
    0.48296291314469025, 0.836516303737469, 0.22414386804185735,
    -0.12940952255092145,
  ],
  db4: [
    0.23037781330885523, 0.7148465705525415, 0.6308807679295904,
    -0.02798376941698385, -0.18703481171888114, 0.030841381835986965,
    0.032883011666982945, -0.010597401784997278,
  ],
};

export const DECOMPOSITION_STAGES = 3;

export interface WaveletBands {
  family: WaveletFamily;
  originalLength: number;
  d1: Float64Array;
  d2: Float64Array;
  d3: Float64Array;
  a3: Float64Array;
}

export class TooShortSeriesError extends Error {
  constructor(length: number, support: number) {
    super(
      `series of length ${length} is shorter than the ${support}-tap ` +
        'wavelet filter support',
    );
    this.name = 'TooShortSeriesError';
  }
}

function filters(family: WaveletFamily): { lo: number[]; hi: number[] } {
  const lo = [...SCALING_FILTERS[family]];
  const taps = lo.length;
  const hi = lo.map((_, k) => (k % 2 === 0 ? 1 : -1) * lo[taps - 1 - k]);
  return { lo, hi };
}

/** Stage lengths implied by the input length: [l0, l1, l2, l3]. */
function stageLengths(originalLength: number): number[] {
  const lengths = [originalLength];
  for (let s = 0; s < DECOMPOSITION_STAGES; s++) {
    const padded = lengths[s] + (lengths[s] % 2);
    lengths.push(padded / 2);
  }
  return lengths;
}

function analyzeOnce(
  input: Float64Array,
  lo: number[],
  hi: number[],
): { approx: Float64Array; detail: Float64Array } {
  let data = input;
  if (data.length % 2 === 1) {
    const padded = new Float64Array(data.length + 1);
    padded.set(data);
    padded[data.length] = data[data.length - 1];
    data = padded;
  }
  const n = data.length;
  const half = n / 2;
  const approx = new Float64Array(half);
  const detail = new Float64Array(half);
  for (let i = 0; i < half; i++) {
    let a = 0;
    let d = 0;
    for (let k = 0; k < lo.length; k++) {
      const value = data[(2 * i + k) % n];
      a += value * lo[k];
      d += value * hi[k];
    }
    approx[i] = a;
    detail[i] = d;
  }
  return { approx, detail };
}

function synthesizeOnce(
  approx: Float64Array,
  detail: Float64Array,
  targetLength: number,
  lo: number[],
  hi: number[],
): Float64Array {
  const n = 2 * approx.length;
  const output = new Float64Array(n);
  for (let i = 0; i < approx.length; i++) {
    const a = approx[i];
    const d = detail[i];
    for (let k = 0; k < lo.length; k++) {
      output[(2 * i + k) % n] += a * lo[k] + d * hi[k];
    }
  }
  if (targetLength === n) return output;
  const trimmed = new Float64Array(targetLength);
  trimmed.set(output.subarray(0, targetLength));
  return trimmed;
}

/** Split a series into three detail bands and one approximation band. */
export function decompose(
  series: ArrayLike<number>,
  family: WaveletFamily = 'db4',
): WaveletBands {
  const { lo, hi } = filters(family);
  if (series.length < lo.length) {
    throw new TooShortSeriesError(series.length, lo.length);
  }
  let current: Float64Array = Float64Array.from(series);
  for (const value of current) {
    if (!Number.isFinite(value)) {
      throw new RangeError('series contains non-finite values');
    }
  }
  const details: Float64Array[] = [];
  for (let s = 0; s < DECOMPOSITION_STAGES; s++) {
    const { approx, detail } = analyzeOnce(current, lo, hi);
    details.push(detail);
    current = approx;
  }
  return {
    family,
    originalLength: series.length,
    d1: details[0],
    d2: details[1],
    d3: details[2],
    a3: current,
  };
}

/** Invert `decompose`; exact up to floating-point rounding. */
export function reconstruct(bands: WaveletBands): Float64Array {
  const { lo, hi } = filters(bands.family);
  const lengths = stageLengths(bands.originalLength);
  let current = bands.a3;
  const details = [bands.d3, bands.d2, bands.d1];
  for (let s = 0; s < DECOMPOSITION_STAGES; s++) {
    const targetLength = lengths[DECOMPOSITION_STAGES - 1 - s];
    current = synthesizeOnce(current, details[s], targetLength, lo, hi);
  }
  return current;
}

export interface BandSignals {
  d1: Float64Array;
  d2: Float64Array;
  d3: Float64Array;
  a3: Float64Array;
}

/**
 * Full-length band components: each is the reconstruction with every other
 * band zeroed, so d1 + d2 + d3 + a3 equals the input sample-for-sample.
 * Per-band predictors train on these aligned series.
 */
export function bandSignals(
  series: ArrayLike<number>,
  family: WaveletFamily = 'db4',
): BandSignals {
  const bands = decompose(series, family);
  const zeroed = (keep: keyof BandSignals): WaveletBands => ({
    ...bands,
    d1: keep === 'd1' ? bands.d1 : new Float64Array(bands.d1.length),
    d2: keep === 'd2' ? bands.d2 : new Float64Array(bands.d2.length),
    d3: keep === 'd3' ? bands.d3 : new Float64Array(bands.d3.length),
    a3: keep === 'a3' ? bands.a3 : new Float64Array(bands.a3.length),
  });
  return {
    d1: reconstruct(zeroed('d1')),
    d2: reconstruct(zeroed('d2')),
    d3: reconstruct(zeroed('d3')),
    a3: reconstruct(zeroed('a3')),
  };
}

/** Sum of squared coefficients, used to compare band energy content. */
export function bandEnergy(band: Float64Array): number {
  let total = 0;
  for (const value of band) total += value * value;
  return total;
}
