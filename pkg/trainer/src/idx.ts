/**
 * Minimal reader for the big-endian IDX files MNIST ships in.
 *
 * Pixels stay as the raw uint8 bytes; callers scale to [0, 1] by dividing
 * by 255 when they build an input vector.
 */

import * as fs from "fs";

export const IMAGE_MAGIC = 0x00000803;
export const LABEL_MAGIC = 0x00000801;

export interface ImageSet {
  count: number;
  rows: number;
  cols: number;
  /** count*rows*cols bytes, image-major. */
  pixels: Uint8Array;
}

export function parseIdxImages(buf: Buffer, name = "buffer"): ImageSet {
  if (buf.length < 16) {
    throw new Error(`${name}: too short for an IDX image header`);
  }
  const magic = buf.readInt32BE(0);
  if (magic !== IMAGE_MAGIC) {
    throw new Error(`${name}: bad magic 0x${magic.toString(16)}, expected 0x803`);
  }
  const count = buf.readInt32BE(4);
  const rows = buf.readInt32BE(8);
  const cols = buf.readInt32BE(12);
  const expected = 16 + count * rows * cols;
  if (buf.length !== expected) {
    throw new Error(`${name}: expected ${expected} bytes, found ${buf.length}`);
  }
  return { count, rows, cols, pixels: new Uint8Array(buf.buffer, buf.byteOffset + 16, count * rows * cols) };
}

export function parseIdxLabels(buf: Buffer, name = "buffer"): Uint8Array {
  if (buf.length < 8) {
    throw new Error(`${name}: too short for an IDX label header`);
  }
  const magic = buf.readInt32BE(0);
  if (magic !== LABEL_MAGIC) {
    throw new Error(`${name}: bad magic 0x${magic.toString(16)}, expected 0x801`);
  }
  const count = buf.readInt32BE(4);
  if (buf.length !== 8 + count) {
    throw new Error(`${name}: expected ${8 + count} bytes, found ${buf.length}`);
  }
  return new Uint8Array(buf.buffer, buf.byteOffset + 8, count);
}

export function readIdxImages(path: string): ImageSet {
  return parseIdxImages(fs.readFileSync(path), path);
}

export function readIdxLabels(path: string): Uint8Array {
  return parseIdxLabels(fs.readFileSync(path), path);
}

/** Scale image `index` into `out` as pixel/255 doubles. */
export function imageInto(set: ImageSet, index: number, out: Float64Array): void {
  const size = set.rows * set.cols;
  const base = index * size;
  for (let i = 0; i < size; i++) {
    out[i] = set.pixels[base + i] / 255.0;
  }
}
