/**
 * Writer for the two-file weights bundle the inference side loads.
 *
 * Layout contract (format_version 1):
 *   - weights.bin: every tensor back to back as little-endian IEEE-754
 *     float32, row-major, in manifest order. For each dense layer the
 *     weight matrix comes first, then its bias vector.
 *   - manifest.json: shapes, byte offsets into the blob, blob length, a
 *     CRC-32 of the blob, and optional activation statistics.
 *
 * Identical inputs produce identical bytes.
 */

import * as fs from "fs";
import * as path from "path";
import { crc32 } from "./crc32";
import { Mlp } from "./mlp";
import { ActivationStats } from "./stats";

export const FORMAT_VERSION = 1;

function writeF32(buf: Buffer, offset: number, values: Float32Array): number {
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(values[i], offset + i * 4);
  }
  return offset + values.length * 4;
}

export interface BundlePaths {
  manifest: string;
  blob: string;
}

/** Write manifest.json + weights.bin for `mlp` into `outDir`. */
export function writeBundle(
  outDir: string,
  mlp: Mlp,
  stats?: ActivationStats,
): BundlePaths {
  const tensors = [mlp.w1, mlp.b1, mlp.w2, mlp.b2];
  const totalBytes = tensors.reduce((acc, t) => acc + t.length * 4, 0);
  const blob = Buffer.alloc(totalBytes);

  let offset = 0;
  const offsets: number[] = [];
  for (const t of tensors) {
    offsets.push(offset);
    offset = writeF32(blob, offset, t);
  }

  const manifest = {
    format_version: FORMAT_VERSION,
    input_shape: [mlp.input],
    class_count: mlp.output,
    layers: [
      {
        kind: "dense",
        shape: [mlp.input, mlp.hidden],
        weights_offset: offsets[0],
        bias_offset: offsets[1],
        threshold: 1.0,
        activation: "relu",
      },
      {
        kind: "dense",
        shape: [mlp.hidden, mlp.output],
        weights_offset: offsets[2],
        bias_offset: offsets[3],
        threshold: 1.0,
        activation: "linear",
      },
    ],
    blob_bytes: blob.length,
    blob_crc32: crc32(blob),
    ...(stats
      ? { activation_stats: { percentile: stats.percentile, values: stats.values } }
      : {}),
  };

  fs.mkdirSync(outDir, { recursive: true });
  const paths = {
    manifest: path.join(outDir, "manifest.json"),
    blob: path.join(outDir, "weights.bin"),
  };
  fs.writeFileSync(paths.blob, blob);
  fs.writeFileSync(paths.manifest, JSON.stringify(manifest, null, 2) + "\n");
  return paths;
}
