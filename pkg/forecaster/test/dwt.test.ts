import { describe, expect, test } from 'vitest';
import {
  bandEnergy,
  bandSignals,
  decompose,
  reconstruct,
  TooShortSeriesError,
  type WaveletFamily,
} from '../src/dwt.js';
import { mulberry32 } from '../src/rng.js';

function maxRelativeError(original: ArrayLike<number>, got: Float64Array): number {
  let scale = 0;
  for (let i = 0; i < original.length; i++) {
    scale = Math.max(scale, Math.abs(original[i]));
  }
  if (scale === 0) scale = 1;
  let worst = 0;
  for (let i = 0; i < original.length; i++) {
    worst = Math.max(worst, Math.abs(got[i] - original[i]) / scale);
  }
  return worst;
}

describe('decompose/reconstruct round trip', () => {
  test('identity within 1e-9 on 100 random series', () => {
    const rand = mulberry32(20240601);
    for (let trial = 0; trial < 100; trial++) {
      // lengths sweep odd/even and pad chains, from near-minimal to long
      const length = 8 + Math.floor(rand() * 492);
      const series = new Float64Array(length);
      for (let i = 0; i < length; i++) series[i] = (rand() - 0.5) * 200;
      const roundTrip = reconstruct(decompose(series));
      expect(roundTrip.length).toBe(length);
      expect(maxRelativeError(series, roundTrip)).toBeLessThanOrEqual(1e-9);
    }
  });

  test.each(['haar', 'db2', 'db4'] as WaveletFamily[])(
    'identity holds for the %s family',
    (family) => {
      const rand = mulberry32(7);
      const series = Float64Array.from({ length: 137 }, () => rand() * 10 - 5);
      const roundTrip = reconstruct(decompose(series, family));
      expect(maxRelativeError(series, roundTrip)).toBeLessThanOrEqual(1e-9);
    },
  );

  test('band lengths follow the halving chain', () => {
    const bands = decompose(new Float64Array(144).fill(1));
    expect(bands.d1.length).toBe(72);
    expect(bands.d2.length).toBe(36);
    expect(bands.d3.length).toBe(18);
    expect(bands.a3.length).toBe(18);
    expect(bands.originalLength).toBe(144);
  });
});

describe('band content', () => {
  test('constant series puts everything into the approximation', () => {
    const series = new Float64Array(96).fill(4.25);
    const bands = decompose(series);
    for (const band of [bands.d1, bands.d2, bands.d3]) {
      for (const value of band) expect(Math.abs(value)).toBeLessThan(1e-12);
    }
    expect(bandEnergy(bands.a3)).toBeGreaterThan(0);
  });

  test('an isolated spike concentrates energy in the finest detail band', () => {
    const series = new Float64Array(128);
    series[64] = 10;
    const bands = decompose(series);
    const e1 = bandEnergy(bands.d1);
    expect(e1).toBeGreaterThan(bandEnergy(bands.d2));
    expect(e1).toBeGreaterThan(bandEnergy(bands.d3));
  });

  test('full-length band signals sum back to the input', () => {
    const rand = mulberry32(99);
    const series = Float64Array.from({ length: 150 }, () => rand() * 8);
    const parts = bandSignals(series);
    const summed = new Float64Array(series.length);
    for (let i = 0; i < series.length; i++) {
      summed[i] = parts.d1[i] + parts.d2[i] + parts.d3[i] + parts.a3[i];
    }
    expect(maxRelativeError(series, summed)).toBeLessThanOrEqual(1e-9);
    for (const part of [parts.d1, parts.d2, parts.d3, parts.a3]) {
      expect(part.length).toBe(series.length);
    }
  });
});

describe('input validation', () => {
  test('rejects series shorter than the filter support', () => {
    expect(() => decompose([1, 2, 3])).toThrow(TooShortSeriesError);
    expect(() => decompose([1, 2, 3, 4, 5, 6, 7])).toThrow(/8-tap/);
  });

  test('haar accepts very short series', () => {
    const roundTrip = reconstruct(decompose([1, 2, 3], 'haar'));
    expect(maxRelativeError([1, 2, 3], roundTrip)).toBeLessThanOrEqual(1e-9);
  });

  test('rejects non-finite values', () => {
    const series = new Float64Array(32);
    series[3] = Number.NaN;
    expect(() => decompose(series)).toThrow(RangeError);
  });
});
