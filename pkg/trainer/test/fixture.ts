import * as fs from 'fs';
import * as path from 'path';
import { PNG } from 'pngjs';

export const CLASSES = ['glioma', 'meningioma', 'notumor', 'pituitary'];

/** xorshift-ish deterministic byte stream for fixture pixels */
function* pixelStream(seed: number): Generator<number> {
  let state = seed >>> 0 || 1;
  while (true) {
    state ^= state << 13;
    state ^= state >>> 17;
    state ^= state << 5;
    state >>>= 0;
    yield state & 0xff;
  }
}

function grayPixels(edge: number, seed: number): Uint8Array {
  const stream = pixelStream(seed);
  const out = new Uint8Array(edge * edge);
  for (let i = 0; i < out.length; i++) {
    out[i] = stream.next().value as number;
  }
  return out;
}

function writeGrayPng(file: string, edge: number, seed: number): void {
  const png = new PNG({ width: edge, height: edge });
  const gray = grayPixels(edge, seed);
  for (let i = 0; i < edge * edge; i++) {
    const v = gray[i];
    png.data[4 * i] = v;
    png.data[4 * i + 1] = v;
    png.data[4 * i + 2] = v;
    png.data[4 * i + 3] = 255;
  }
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, PNG.sync.write(png));
}

/** Minimal bottom-up 24-bit BI_RGB bitmap writer. */
function writeGrayBmp(file: string, edge: number, seed: number): void {
  const gray = grayPixels(edge, seed);
  const rowSize = Math.ceil((edge * 3) / 4) * 4;
  const dataSize = rowSize * edge;
  const buf = Buffer.alloc(54 + dataSize);
  buf.write('BM', 0, 'ascii');
  buf.writeUInt32LE(54 + dataSize, 2);
  buf.writeUInt32LE(54, 10);
  buf.writeUInt32LE(40, 14);
  buf.writeInt32LE(edge, 18);
  buf.writeInt32LE(edge, 22); // positive height: bottom-up rows
  buf.writeUInt16LE(1, 26);
  buf.writeUInt16LE(24, 28);
  buf.writeUInt32LE(dataSize, 34);
  for (let y = 0; y < edge; y++) {
    const row = 54 + (edge - 1 - y) * rowSize;
    for (let x = 0; x < edge; x++) {
      const v = gray[y * edge + x];
      buf[row + 3 * x] = v;
      buf[row + 3 * x + 1] = v;
      buf[row + 3 * x + 2] = v;
    }
  }
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, buf);
}

/**
 * Materialized-split fixture: 10 images per class partitioned 7/1/2 into
 * train/val/test, mirroring the toolkit's directory layout contract.
 */
export function buildSplitFixture(root: string, edge = 32): { testCount: number } {
  const partitions: Array<[string, number]> = [
    ['train', 7],
    ['val', 1],
    ['test', 2],
  ];
  let seed = 42;
  let testCount = 0;
  for (const [partition, count] of partitions) {
    for (const cls of CLASSES) {
      for (let i = 0; i < count; i++) {
        seed += 1;
        // one BMP in the test partition keeps the full format set covered
        if (partition === 'test' && cls === CLASSES[0] && i === 0) {
          writeGrayBmp(path.join(root, partition, cls, `img_${i}.bmp`), edge, seed);
        } else {
          writeGrayPng(path.join(root, partition, cls, `img_${i}.png`), edge, seed);
        }
        if (partition === 'test') testCount += 1;
      }
    }
  }
  return { testCount };
}
