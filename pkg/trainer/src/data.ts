import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';
import { PNG } from 'pngjs';
import * as jpeg from 'jpeg-js';
import { SplitNotFound } from './errors';

export interface Sample {
  /** split-relative id, e.g. "test/glioma/img_000.png" */
  id: string;
  classIndex: number;
  /** grayscale pixels in [0, 1], length edge*edge */
  pixels: Float32Array;
}

export interface PartitionData {
  samples: Sample[];
  xs: tf.Tensor4D;
  ys: tf.Tensor2D;
}

const IMAGE_EXTENSIONS = new Set(['.png', '.jpg', '.jpeg', '.bmp']);

/** Uncompressed BI_RGB bitmaps: 8-bit paletted, 24- and 32-bit. */
function decodeBmp(bytes: Buffer): { width: number; height: number; data: Uint8Array } {
  if (bytes.length < 54 || bytes.toString('ascii', 0, 2) !== 'BM') {
    throw new Error('not a BMP file');
  }
  const dataOffset = bytes.readUInt32LE(10);
  const headerSize = bytes.readUInt32LE(14);
  const width = bytes.readInt32LE(18);
  const rawHeight = bytes.readInt32LE(22);
  const bpp = bytes.readUInt16LE(28);
  const compression = bytes.readUInt32LE(30);
  if (compression !== 0 || ![8, 24, 32].includes(bpp)) {
    throw new Error(`unsupported BMP variant (bpp=${bpp}, compression=${compression})`);
  }
  const height = Math.abs(rawHeight);
  const bottomUp = rawHeight > 0;
  const palette = bytes.subarray(14 + headerSize, dataOffset); // BGRA entries
  const rowSize = Math.ceil((width * bpp) / 32) * 4;
  const data = new Uint8Array(width * height * 4);
  for (let y = 0; y < height; y++) {
    const srcRow = dataOffset + (bottomUp ? height - 1 - y : y) * rowSize;
    for (let x = 0; x < width; x++) {
      let r: number, g: number, b: number;
      if (bpp === 8) {
        const idx = bytes[srcRow + x] * 4;
        b = palette[idx];
        g = palette[idx + 1];
        r = palette[idx + 2];
      } else {
        const px = srcRow + x * (bpp / 8);
        b = bytes[px];
        g = bytes[px + 1];
        r = bytes[px + 2];
      }
      const o = 4 * (y * width + x);
      data[o] = r;
      data[o + 1] = g;
      data[o + 2] = b;
      data[o + 3] = 255;
    }
  }
  return { width, height, data };
}

function decodeToRgba(file: string): { width: number; height: number; data: Uint8Array } {
  const bytes = fs.readFileSync(file);
  const ext = path.extname(file).toLowerCase();
  if (ext === '.png') {
    const png = PNG.sync.read(bytes);
    return { width: png.width, height: png.height, data: png.data };
  }
  if (ext === '.bmp') {
    return decodeBmp(bytes);
  }
  const img = jpeg.decode(bytes, { useTArray: true });
  return { width: img.width, height: img.height, data: img.data };
}

/** Rec.601 luma, normalized to [0, 1]. */
function toGray(rgba: { width: number; height: number; data: Uint8Array }): Float32Array {
  const { width, height, data } = rgba;
  const gray = new Float32Array(width * height);
  for (let i = 0; i < width * height; i++) {
    const r = data[4 * i];
    const g = data[4 * i + 1];
    const b = data[4 * i + 2];
    gray[i] = (0.299 * r + 0.587 * g + 0.114 * b) / 255;
  }
  return gray;
}

/** Bilinear resample (half-pixel centers) of a grayscale buffer. */
function resample(src: Float32Array, w: number, h: number, edge: number): Float32Array {
  if (w === edge && h === edge) return src;
  const out = new Float32Array(edge * edge);
  for (let y = 0; y < edge; y++) {
    const sy = ((y + 0.5) * h) / edge - 0.5;
    const y0 = Math.floor(sy);
    const fy = sy - y0;
    const y0c = Math.min(Math.max(y0, 0), h - 1);
    const y1c = Math.min(Math.max(y0 + 1, 0), h - 1);
    for (let x = 0; x < edge; x++) {
      const sx = ((x + 0.5) * w) / edge - 0.5;
      const x0 = Math.floor(sx);
      const fx = sx - x0;
      const x0c = Math.min(Math.max(x0, 0), w - 1);
      const x1c = Math.min(Math.max(x0 + 1, 0), w - 1);
      const top = src[y0c * w + x0c] * (1 - fx) + src[y0c * w + x1c] * fx;
      const bot = src[y1c * w + x0c] * (1 - fx) + src[y1c * w + x1c] * fx;
      out[y * edge + x] = top * (1 - fy) + bot * fy;
    }
  }
  return out;
}

export function listClasses(splitDir: string): string[] {
  const trainDir = path.join(splitDir, 'train');
  if (!fs.existsSync(trainDir)) {
    throw new SplitNotFound(splitDir, 'missing train/ subtree');
  }
  const classes = fs
    .readdirSync(trainDir, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort();
  if (classes.length < 2) {
    throw new SplitNotFound(splitDir, 'train/ needs at least two class directories');
  }
  return classes;
}

export function loadPartition(
  splitDir: string,
  partition: 'train' | 'val' | 'test',
  classes: string[],
  edge: number,
): PartitionData | null {
  const base = path.join(splitDir, partition);
  const samples: Sample[] = [];
  if (fs.existsSync(base)) {
    for (let c = 0; c < classes.length; c++) {
      const classDir = path.join(base, classes[c]);
      if (!fs.existsSync(classDir)) continue;
      for (const name of fs.readdirSync(classDir).sort()) {
        if (!IMAGE_EXTENSIONS.has(path.extname(name).toLowerCase())) continue;
        const rgba = decodeToRgba(path.join(classDir, name));
        const gray = resample(toGray(rgba), rgba.width, rgba.height, edge);
        samples.push({
          id: `${partition}/${classes[c]}/${name}`,
          classIndex: c,
          pixels: gray,
        });
      }
    }
  }
  if (samples.length === 0) {
    if (partition === 'train') {
      throw new SplitNotFound(splitDir, 'train partition has no images');
    }
    return null;
  }
  const x = new Float32Array(samples.length * edge * edge);
  const y = new Float32Array(samples.length * classes.length);
  samples.forEach((s, i) => {
    x.set(s.pixels, i * edge * edge);
    y[i * classes.length + s.classIndex] = 1;
  });
  return {
    samples,
    xs: tf.tensor4d(x, [samples.length, edge, edge, 1]),
    ys: tf.tensor2d(y, [samples.length, classes.length]),
  };
}

/** SplitMix64-style deterministic shuffle for reproducible batch order. */
export function shuffledIndices(n: number, seed: number): number[] {
  let state = BigInt(seed) & 0xffffffffffffffffn;
  const next = (): bigint => {
    state = (state + 0x9e3779b97f4a7c15n) & 0xffffffffffffffffn;
    let z = state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & 0xffffffffffffffffn;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & 0xffffffffffffffffn;
    return z ^ (z >> 31n);
  };
  const idx = Array.from({ length: n }, (_, i) => i);
  for (let i = n - 1; i > 0; i--) {
    const j = Number(next() % BigInt(i + 1));
    [idx[i], idx[j]] = [idx[j], idx[i]];
  }
  return idx;
}
