/**
 * Per-layer activation statistics over a calibration batch.
 *
 * For each weight layer the statistic is a percentile of the pooled
 * positive-part activations (all units, all samples, zeros included).
 * Percentiles interpolate linearly between order statistics; 1.0 is the
 * exact maximum. The consumer divides weights by these values when it
 * normalizes the network for rate coding.
 */

import { ImageSet, imageInto } from "./idx";
import { Mlp } from "./mlp";

export interface ActivationStats {
  percentile: number;
  values: number[];
}

/** Linear-interpolated percentile (q in [0, 1]) of an unsorted array. */
export function percentile(values: Float64Array, q: number): number {
  if (values.length === 0) {
    throw new Error("percentile of empty array");
  }
  const sorted = Float64Array.from(values).sort();
  if (q >= 1.0) return sorted[sorted.length - 1];
  if (q <= 0.0) return sorted[0];
  const rank = q * (sorted.length - 1);
  const lo = Math.floor(rank);
  const frac = rank - lo;
  if (frac === 0) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/**
 * Activation stats of `mlp` on the first `count` images of `images`.
 *
 * Layer 1 pools the ReLU outputs; layer 2 pools max(logit, 0), the part a
 * spiking output neuron can represent.
 */
export function collectStats(
  mlp: Mlp,
  images: ImageSet,
  count: number,
  q = 0.999,
): ActivationStats {
  const n = Math.min(count, images.count);
  if (n === 0) {
    throw new Error("calibration set is empty");
  }
  const x = new Float64Array(mlp.input);
  const h = new Float64Array(mlp.hidden);
  const z = new Float64Array(mlp.output);
  const pool1 = new Float64Array(n * mlp.hidden);
  const pool2 = new Float64Array(n * mlp.output);
  for (let s = 0; s < n; s++) {
    imageInto(images, s, x);
    mlp.forward(x, h, z);
    pool1.set(h, s * mlp.hidden);
    for (let k = 0; k < mlp.output; k++) {
      pool2[s * mlp.output + k] = z[k] > 0 ? z[k] : 0;
    }
  }
  const values = [percentile(pool1, q), percentile(pool2, q)];
  for (const v of values) {
    if (!(v > 0)) {
      throw new Error(`activation statistic ${v} is not positive`);
    }
  }
  return { percentile: q, values };
}
