import * as fs from 'fs';
import * as path from 'path';
import { PNG } from 'pngjs';
import * as tf from '@tensorflow/tfjs';

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major values in [0, 1]. */
  data: Float32Array;
}

export function readGrayPng(filePath: string): GrayImage {
  const png = PNG.sync.read(fs.readFileSync(filePath));
  const out = new Float32Array(png.width * png.height);
  for (let i = 0; i < out.length; i++) {
    out[i] = png.data[4 * i] / 255; // gray sources replicate into RGB
  }
  return { width: png.width, height: png.height, data: out };
}

export function writeGrayPng(filePath: string, img: GrayImage): void {
  const png = new PNG({ width: img.width, height: img.height });
  for (let i = 0; i < img.data.length; i++) {
    const v = Math.round(Math.min(1, Math.max(0, img.data[i])) * 255);
    png.data[4 * i] = v;
    png.data[4 * i + 1] = v;
    png.data[4 * i + 2] = v;
    png.data[4 * i + 3] = 255;
  }
  fs.writeFileSync(filePath, PNG.sync.write(png));
}

export function writeMaskPng(filePath: string, width: number, height: number, mask: Uint8Array): void {
  const data = new Float32Array(mask.length);
  for (let i = 0; i < mask.length; i++) data[i] = mask[i] ? 1 : 0;
  writeGrayPng(filePath, { width, height, data });
}

export interface SamplePair {
  id: string;
  image: GrayImage;
  /** Binary ground truth, same size as image. */
  label: GrayImage;
}

export function listPngs(dir: string): string[] {
  return fs
    .readdirSync(dir)
    .filter((name) => name.toLowerCase().endsWith('.png'))
    .sort();
}

/** Load same-named image/label pairs for the given ids (or all images). */
export function loadPairs(imageDir: string, labelDir: string, ids?: string[]): SamplePair[] {
  const names = ids ?? listPngs(imageDir);
  return names.map((id) => {
    const image = readGrayPng(path.join(imageDir, id));
    const label = readGrayPng(path.join(labelDir, id));
    if (image.width !== label.width || image.height !== label.height) {
      throw new Error(`image/label size mismatch for ${id}`);
    }
    for (let i = 0; i < label.data.length; i++) {
      label.data[i] = label.data[i] > 0.5 ? 1 : 0;
    }
    return { id, image, label };
  });
}

/** Stack pairs into NHWC tensors. */
export function toTensors(pairs: SamplePair[]): { x: tf.Tensor4D; y: tf.Tensor4D } {
  if (pairs.length === 0) throw new Error('empty batch');
  const { width, height } = pairs[0].image;
  const x = new Float32Array(pairs.length * width * height);
  const y = new Float32Array(pairs.length * width * height);
  pairs.forEach((pair, i) => {
    x.set(pair.image.data, i * width * height);
    y.set(pair.label.data, i * width * height);
  });
  return {
    x: tf.tensor4d(x, [pairs.length, height, width, 1]),
    y: tf.tensor4d(y, [pairs.length, height, width, 1]),
  };
}
