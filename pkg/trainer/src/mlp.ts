/**
 * Plain two-layer ReLU MLP (input -> hidden -> logits) with minibatch SGD
 * and softmax cross-entropy loss. No framework: weights live in
 * Float32Array (the exported precision), arithmetic runs in doubles.
 *
 * Weight layout matches the exported blob: w1 is (input, hidden) row-major
 * so w1[i*hidden + j] connects input i to hidden unit j, and likewise for
 * w2 (hidden, output).
 */

import { ImageSet, imageInto } from "./idx";
import { gaussian, mulberry32, shuffle, Rng } from "./prng";

export class Mlp {
  readonly input: number;
  readonly hidden: number;
  readonly output: number;
  w1: Float32Array;
  b1: Float32Array;
  w2: Float32Array;
  b2: Float32Array;

  constructor(input: number, hidden: number, output: number, seed: number) {
    this.input = input;
    this.hidden = hidden;
    this.output = output;
    this.w1 = new Float32Array(input * hidden);
    this.b1 = new Float32Array(hidden);
    this.w2 = new Float32Array(hidden * output);
    this.b2 = new Float32Array(output);

    // He-normal init, biases zero
    const normal = gaussian(mulberry32(seed));
    const s1 = Math.sqrt(2.0 / input);
    for (let i = 0; i < this.w1.length; i++) this.w1[i] = s1 * normal();
    const s2 = Math.sqrt(2.0 / hidden);
    for (let i = 0; i < this.w2.length; i++) this.w2[i] = s2 * normal();
  }

  /** Hidden activations and logits for one input vector. */
  forward(x: Float64Array, h: Float64Array, z: Float64Array): void {
    const { input, hidden, output, w1, b1, w2, b2 } = this;
    for (let j = 0; j < hidden; j++) h[j] = b1[j];
    for (let i = 0; i < input; i++) {
      const xi = x[i];
      if (xi === 0) continue; // MNIST is mostly background
      const row = i * hidden;
      for (let j = 0; j < hidden; j++) h[j] += xi * w1[row + j];
    }
    for (let j = 0; j < hidden; j++) {
      if (h[j] < 0) h[j] = 0;
    }
    for (let k = 0; k < output; k++) z[k] = b2[k];
    for (let j = 0; j < hidden; j++) {
      const hj = h[j];
      if (hj === 0) continue;
      const row = j * output;
      for (let k = 0; k < output; k++) z[k] += hj * w2[row + k];
    }
  }

  /** Fraction of correctly classified images (first `limit`, or all). */
  accuracy(images: ImageSet, labels: Uint8Array, limit?: number): number {
    const n = limit === undefined ? images.count : Math.min(limit, images.count);
    const x = new Float64Array(this.input);
    const h = new Float64Array(this.hidden);
    const z = new Float64Array(this.output);
    let correct = 0;
    for (let s = 0; s < n; s++) {
      imageInto(images, s, x);
      this.forward(x, h, z);
      let best = 0;
      for (let k = 1; k < this.output; k++) {
        if (z[k] > z[best]) best = k; // first max wins, like argmax
      }
      if (best === labels[s]) correct++;
    }
    return correct / n;
  }

  /**
   * One SGD epoch over the whole set in shuffled order.
   *
   * Returns the mean cross-entropy loss. `rng` drives the shuffle only.
   */
  trainEpoch(
    images: ImageSet,
    labels: Uint8Array,
    rng: Rng,
    batchSize = 32,
    lr = 0.1,
  ): number {
    const { input, hidden, output, w1, b1, w2, b2 } = this;
    const n = images.count;
    const order = new Int32Array(n);
    for (let i = 0; i < n; i++) order[i] = i;
    shuffle(order, rng);

    const x = new Float64Array(input);
    const h = new Float64Array(hidden);
    const z = new Float64Array(output);
    const p = new Float64Array(output);
    const dz = new Float64Array(output);
    const dh = new Float64Array(hidden);
    const gw1 = new Float64Array(w1.length);
    const gb1 = new Float64Array(hidden);
    const gw2 = new Float64Array(w2.length);
    const gb2 = new Float64Array(output);

    let lossSum = 0;
    for (let start = 0; start < n; start += batchSize) {
      const end = Math.min(start + batchSize, n);
      gw1.fill(0);
      gb1.fill(0);
      gw2.fill(0);
      gb2.fill(0);

      for (let s = start; s < end; s++) {
        const idx = order[s];
        imageInto(images, idx, x);
        this.forward(x, h, z);

        // softmax + cross-entropy, max-shifted for stability
        let zMax = z[0];
        for (let k = 1; k < output; k++) if (z[k] > zMax) zMax = z[k];
        let sum = 0;
        for (let k = 0; k < output; k++) {
          p[k] = Math.exp(z[k] - zMax);
          sum += p[k];
        }
        const label = labels[idx];
        lossSum += Math.log(sum) - (z[label] - zMax);
        for (let k = 0; k < output; k++) {
          dz[k] = p[k] / sum - (k === label ? 1 : 0);
        }

        for (let k = 0; k < output; k++) gb2[k] += dz[k];
        for (let j = 0; j < hidden; j++) {
          const hj = h[j];
          if (hj === 0) {
            dh[j] = 0;
            continue;
          }
          const row = j * output;
          let acc = 0;
          for (let k = 0; k < output; k++) {
            gw2[row + k] += hj * dz[k];
            acc += w2[row + k] * dz[k];
          }
          dh[j] = acc;
        }
        for (let j = 0; j < hidden; j++) gb1[j] += dh[j];
        for (let i = 0; i < input; i++) {
          const xi = x[i];
          if (xi === 0) continue;
          const row = i * hidden;
          for (let j = 0; j < hidden; j++) gw1[row + j] += xi * dh[j];
        }
      }

      const scale = lr / (end - start);
      for (let i = 0; i < w1.length; i++) w1[i] -= scale * gw1[i];
      for (let j = 0; j < hidden; j++) b1[j] -= scale * gb1[j];
      for (let i = 0; i < w2.length; i++) w2[i] -= scale * gw2[i];
      for (let k = 0; k < output; k++) b2[k] -= scale * gb2[k];
    }
    return lossSum / n;
  }
}
