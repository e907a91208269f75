/**
 * Seeded synthetic weather/power histories for exercising the forecasting
 * pipeline without any measured dataset. Shapes are physically flavored —
 * irradiance bells, breeze cycles, daily temperature swing — but make no
 * claim beyond being smooth, correlated, and reproducible.
 */
import { gaussian, mulberry32 } from './rng.js';
import type { HistoryMatrix } from './pipeline.js';

export interface SyntheticOptions {
  kind: 'pv' | 'wind';
  days: number;
  stepsPerDay: number;
  seed: number;
  /** standard deviation of the additive noise, as a fraction of peak power */
  noise: number;
}

export const DEFAULT_SYNTHETIC: SyntheticOptions = {
  kind: 'pv',
  days: 6,
  stepsPerDay: 96,
  seed: 11,
  noise: 0.01,
};

export interface SyntheticHistory extends HistoryMatrix {
  featureNames: string[];
  /** minutes since midnight of day 0, one entry per row */
  minutes: Float64Array;
}

export function syntheticHistory(options: Partial<SyntheticOptions> = {}): SyntheticHistory {
  const { kind, days, stepsPerDay, seed, noise } = { ...DEFAULT_SYNTHETIC, ...options };
  const n = days * stepsPerDay;
  const rand = mulberry32(seed);
  const noiseDraw = gaussian(rand);
  const minutes = new Float64Array(n);
  const temperature = new Float64Array(n);
  const humidity = new Float64Array(n);
  const windSpeed = new Float64Array(n);
  const irradiance = new Float64Array(n);
  const power = new Float64Array(n);
  const peak = 100;
  for (let t = 0; t < n; t++) {
    const dayPhase = (2 * Math.PI * (t % stepsPerDay)) / stepsPerDay;
    const slowPhase = (2 * Math.PI * t) / (stepsPerDay * 2.5);
    minutes[t] = (t * 24 * 60) / stepsPerDay;
    temperature[t] = 12 + 8 * Math.sin(dayPhase - Math.PI / 2) + 0.5 * Math.sin(slowPhase);
    humidity[t] = 60 - 15 * Math.sin(dayPhase - Math.PI / 2) + 2 * Math.cos(slowPhase);
    windSpeed[t] = 7 + 3.5 * Math.sin(slowPhase) + 1.2 * Math.sin(dayPhase + 1.1);
    irradiance[t] = Math.max(0, 900 * Math.sin(dayPhase - Math.PI / 2));
    const base =
      kind === 'pv'
        ? peak * (irradiance[t] / 900)
        : peak * Math.min(1, Math.max(0, (windSpeed[t] - 3) / 9) ** 3);
    power[t] = Math.max(0, base + noise * peak * noiseDraw());
  }
  const featureNames =
    kind === 'pv'
      ? ['temperature', 'humidity', 'wind_speed', 'irradiance']
      : ['temperature', 'humidity', 'wind_speed', 'wind_direction'];
  const direction = new Float64Array(n);
  for (let t = 0; t < n; t++) {
    direction[t] = 180 + 60 * Math.sin((2 * Math.PI * t) / (stepsPerDay * 3));
  }
  const features =
    kind === 'pv'
      ? [temperature, humidity, windSpeed, irradiance]
      : [temperature, humidity, windSpeed, direction];
  return { features, power, featureNames, minutes };
}

/**
 * A smooth but steadily moving univariate signal: trend plus two
 * incommensurate sinusoids whose step-to-step motion is large relative to
 * the noise. That is exactly the regime where a lag-1 copy pays a visible
 * price and a trained model can do better.
 */
export function smoothSignal(length: number, seed: number, noiseStd = 1.5): Float64Array {
  const rand = mulberry32(seed);
  const noiseDraw = gaussian(rand);
  const out = new Float64Array(length);
  for (let t = 0; t < length; t++) {
    out[t] =
      52 +
      30 * Math.sin((2 * Math.PI * t) / 16) +
      10 * Math.sin((2 * Math.PI * t) / 5 + 0.7) +
      0.04 * t +
      noiseStd * noiseDraw();
  }
  return out;
}
