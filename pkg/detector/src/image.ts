import { readFileSync } from "fs";
import { decode } from "jpeg-js";

export interface Bitmap {
  width: number;
  height: number;
  data: Uint8Array; // RGBA, row major
}

export function readJpeg(path: string): Bitmap {
  const raw = readFileSync(path);
  const decoded = decode(raw, { useTArray: true, maxMemoryUsageInMB: 128 });
  return { width: decoded.width, height: decoded.height, data: decoded.data };
}

export function luma(img: Bitmap, x: number, y: number): number {
  const i = (y * img.width + x) * 4;
  return 0.299 * img.data[i] + 0.587 * img.data[i + 1] + 0.114 * img.data[i + 2];
}

export function medianLuma(img: Bitmap): number {
  const values = new Float64Array(img.width * img.height);
  let n = 0;
  for (let y = 0; y < img.height; y++) {
    for (let x = 0; x < img.width; x++) {
      values[n++] = luma(img, x, y);
    }
  }
  values.sort();
  return values[n >> 1];
}

export interface Blob {
  area: number;
  x0: number;
  y0: number;
  x1: number; // exclusive
  y1: number; // exclusive
}

/** 4-connected components of a binary mask, smallest first dropped. */
export function connectedComponents(
  mask: Uint8Array,
  width: number,
  height: number,
  minArea: number
): Blob[] {
  const labels = new Int32Array(width * height).fill(-1);
  const queue = new Int32Array(width * height);
  const blobs: Blob[] = [];
  let next = 0;
  for (let start = 0; start < mask.length; start++) {
    if (!mask[start] || labels[start] !== -1) {
      continue;
    }
    const label = next++;
    let head = 0;
    let tail = 0;
    queue[tail++] = start;
    labels[start] = label;
    let area = 0;
    let x0 = width;
    let y0 = height;
    let x1 = 0;
    let y1 = 0;
    while (head < tail) {
      const idx = queue[head++];
      const x = idx % width;
      const y = (idx / width) | 0;
      area++;
      if (x < x0) x0 = x;
      if (y < y0) y0 = y;
      if (x >= x1) x1 = x + 1;
      if (y >= y1) y1 = y + 1;
      if (x > 0 && mask[idx - 1] && labels[idx - 1] === -1) {
        labels[idx - 1] = label;
        queue[tail++] = idx - 1;
      }
      if (x + 1 < width && mask[idx + 1] && labels[idx + 1] === -1) {
        labels[idx + 1] = label;
        queue[tail++] = idx + 1;
      }
      if (y > 0 && mask[idx - width] && labels[idx - width] === -1) {
        labels[idx - width] = label;
        queue[tail++] = idx - width;
      }
      if (y + 1 < height && mask[idx + width] && labels[idx + width] === -1) {
        labels[idx + width] = label;
        queue[tail++] = idx + width;
      }
    }
    if (area >= minArea) {
      blobs.push({ area, x0, y0, x1, y1 });
    }
  }
  return blobs;
}
