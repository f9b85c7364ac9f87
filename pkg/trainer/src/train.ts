/**
 * Train the desk-scale MNIST MLP and export it as a weights bundle.
 *
 * Usage:
 *   node dist/train.js [--out-dir out] [--epochs 6] [--lr 0.1] [--seed 7]
 *                      [--batch-size 32] [--hidden 128] [--data-dir PATH]
 *
 * Writes manifest.json, weights.bin and train_log.json into --out-dir.
 * A fixed seed reproduces the export byte for byte on the same toolchain
 * (JS engine differences in Math.exp/Math.log could shift the last bits).
 */

import * as fs from "fs";
import * as path from "path";
import { parseArgs } from "util";

import { writeBundle } from "./bundle";
import { readIdxImages, readIdxLabels } from "./idx";
import { Mlp } from "./mlp";
import { mulberry32 } from "./prng";
import { collectStats } from "./stats";

function defaultDataDir(): string {
  // the mnist-data package ships the four original IDX files
  return path.join(path.dirname(require.resolve("mnist-data/package.json")), "data");
}

export interface TrainConfig {
  dataDir: string;
  outDir: string;
  epochs: number;
  learningRate: number;
  batchSize: number;
  hidden: number;
  seed: number;
  calibCount: number;
  percentile: number;
  accuracyFloor: number;
}

export function parseConfig(argv: string[]): TrainConfig {
  const { values } = parseArgs({
    args: argv,
    options: {
      "data-dir": { type: "string" },
      "out-dir": { type: "string", default: "out" },
      epochs: { type: "string", default: "6" },
      lr: { type: "string", default: "0.1" },
      "batch-size": { type: "string", default: "32" },
      hidden: { type: "string", default: "128" },
      seed: { type: "string", default: "7" },
      "calib-count": { type: "string", default: "512" },
      percentile: { type: "string", default: "0.999" },
      "accuracy-floor": { type: "string", default: "0.95" },
    },
  });
  return {
    dataDir: values["data-dir"] ?? defaultDataDir(),
    outDir: values["out-dir"]!,
    epochs: parseInt(values.epochs!, 10),
    learningRate: parseFloat(values.lr!),
    batchSize: parseInt(values["batch-size"]!, 10),
    hidden: parseInt(values.hidden!, 10),
    seed: parseInt(values.seed!, 10),
    calibCount: parseInt(values["calib-count"]!, 10),
    percentile: parseFloat(values.percentile!),
    accuracyFloor: parseFloat(values["accuracy-floor"]!),
  };
}

export function trainAndExport(cfg: TrainConfig): void {
  const train = readIdxImages(path.join(cfg.dataDir, "train-images-idx3-ubyte"));
  const trainLabels = readIdxLabels(path.join(cfg.dataDir, "train-labels-idx1-ubyte"));
  const test = readIdxImages(path.join(cfg.dataDir, "t10k-images-idx3-ubyte"));
  const testLabels = readIdxLabels(path.join(cfg.dataDir, "t10k-labels-idx1-ubyte"));
  if (train.count !== trainLabels.length || test.count !== testLabels.length) {
    throw new Error("image/label counts disagree");
  }

  const inputSize = train.rows * train.cols;
  const mlp = new Mlp(inputSize, cfg.hidden, 10, cfg.seed);
  const shuffleRng = mulberry32(cfg.seed ^ 0x9e3779b9);

  console.log(
    `training mlp-${inputSize}-${cfg.hidden}-10 on ${train.count} images ` +
      `(epochs=${cfg.epochs} lr=${cfg.learningRate} batch=${cfg.batchSize} seed=${cfg.seed})`,
  );
  const epochLog: { epoch: number; train_loss: number; test_accuracy: number }[] = [];
  for (let epoch = 1; epoch <= cfg.epochs; epoch++) {
    const t0 = Date.now();
    const loss = mlp.trainEpoch(train, trainLabels, shuffleRng, cfg.batchSize, cfg.learningRate);
    const acc = mlp.accuracy(test, testLabels);
    epochLog.push({ epoch, train_loss: loss, test_accuracy: acc });
    console.log(
      `epoch ${epoch}/${cfg.epochs}  loss=${loss.toFixed(4)}  ` +
        `test=${(acc * 100).toFixed(2)}%  (${((Date.now() - t0) / 1000).toFixed(1)}s)`,
    );
  }

  const testAccuracy = epochLog[epochLog.length - 1].test_accuracy;
  const first1k = mlp.accuracy(test, testLabels, 1000);
  if (testAccuracy < cfg.accuracyFloor) {
    console.warn(
      `warning: test accuracy ${(testAccuracy * 100).toFixed(2)}% is below the ` +
        `${(cfg.accuracyFloor * 100).toFixed(0)}% floor`,
    );
  }

  const stats = collectStats(mlp, train, cfg.calibCount, cfg.percentile);
  const paths = writeBundle(cfg.outDir, mlp, stats);

  const log = {
    architecture: `mlp-${inputSize}-${cfg.hidden}-10`,
    seed: cfg.seed,
    epochs: cfg.epochs,
    batch_size: cfg.batchSize,
    learning_rate: cfg.learningRate,
    epoch_log: epochLog,
    test_accuracy: testAccuracy,
    test_accuracy_first_1000: first1k,
    test_count: test.count,
    calibration: {
      split: "train",
      count: Math.min(cfg.calibCount, train.count),
      percentile: cfg.percentile,
    },
    activation_stats: stats.values,
    toolchain: `node ${process.version}`,
  };
  const logPath = path.join(cfg.outDir, "train_log.json");
  fs.writeFileSync(logPath, JSON.stringify(log, null, 2) + "\n");

  console.log(`test accuracy ${(testAccuracy * 100).toFixed(2)}% (first 1000: ${(first1k * 100).toFixed(2)}%)`);
  console.log(`wrote ${paths.manifest}, ${paths.blob}, ${logPath}`);
}

if (require.main === module) {
  trainAndExport(parseConfig(process.argv.slice(2)));
}
