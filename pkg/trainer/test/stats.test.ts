import { describe, expect, it } from "vitest";

import { ImageSet } from "../src/idx";
import { Mlp } from "../src/mlp";
import { collectStats, percentile } from "../src/stats";

describe("percentile", () => {
  it("interpolates linearly between order statistics", () => {
    const v = Float64Array.from([9, 8, 7, 6, 5, 4, 3, 2, 1, 0]);
    expect(percentile(v, 0.5)).toBe(4.5);
    expect(percentile(v, 0.0)).toBe(0);
    expect(percentile(v, 1.0)).toBe(9);
    expect(percentile(v, 0.25)).toBeCloseTo(2.25, 12);
  });

  it("matches the rank formula on 0..999", () => {
    const v = Float64Array.from({ length: 1000 }, (_, i) => i);
    // rank 0.999 * 999 = 998.001
    expect(percentile(v, 0.999)).toBeCloseTo(998.001, 9);
  });

  it("rejects empty input", () => {
    expect(() => percentile(new Float64Array(0), 0.5)).toThrow(/empty/);
  });
});

function handBuiltMlp(): Mlp {
  // 1 input, 2 hidden, 2 outputs with hand-set weights:
  // h = [relu(x), relu(-x)], z = h (identity second layer)
  const mlp = new Mlp(1, 2, 2, 0);
  mlp.w1.set([1, -1]);
  mlp.b1.fill(0);
  mlp.w2.set([1, 0, 0, 1]);
  mlp.b2.fill(0);
  return mlp;
}

describe("collectStats", () => {
  it("pools activations including zeros", () => {
    const mlp = handBuiltMlp();
    const set: ImageSet = { count: 1, rows: 1, cols: 1, pixels: Uint8Array.from([255]) };
    // x=1 -> h=[1,0], z=[1,0]; pooled layer values are {1, 0}
    const stats = collectStats(mlp, set, 1, 0.5);
    expect(stats.values[0]).toBeCloseTo(0.5, 12);
    expect(stats.values[1]).toBeCloseTo(0.5, 12);
    const statsMax = collectStats(mlp, set, 1, 1.0);
    expect(statsMax.values).toEqual([1, 1]);
  });

  it("clamps negative logits out of the pool", () => {
    const mlp = handBuiltMlp();
    mlp.w2.set([1, -5, 0, -5]); // second logit always <= 0 for x > 0
    const set: ImageSet = { count: 2, rows: 1, cols: 1, pixels: Uint8Array.from([255, 127]) };
    const stats = collectStats(mlp, set, 2, 1.0);
    expect(stats.values[1]).toBeCloseTo(1.0, 12); // max over positive parts only
  });

  it("rejects a non-positive statistic", () => {
    const mlp = handBuiltMlp();
    mlp.w1.set([-1, -1]); // hidden layer never activates
    const set: ImageSet = { count: 1, rows: 1, cols: 1, pixels: Uint8Array.from([255]) };
    expect(() => collectStats(mlp, set, 1, 1.0)).toThrow(/not positive/);
  });

  it("rejects an empty calibration set", () => {
    const mlp = handBuiltMlp();
    const set: ImageSet = { count: 0, rows: 1, cols: 1, pixels: new Uint8Array(0) };
    expect(() => collectStats(mlp, set, 0, 1.0)).toThrow(/empty/);
  });
});
