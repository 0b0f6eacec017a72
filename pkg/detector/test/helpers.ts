import { readFileSync } from "fs";
import { join } from "path";

import { Bitmap } from "../src/image";
import { Region } from "../src/schema";

export const FIXTURES = join(__dirname, "fixtures");

export const KNOWN = JSON.parse(
  readFileSync(join(FIXTURES, "known_boxes.json"), "utf-8")
) as Record<string, { kind: string; box: [number, number, number, number] }>;

export function iou(a: Region, box: [number, number, number, number]): number {
  const [bx, by, bw, bh] = box;
  const ix = Math.max(0, Math.min(a.x + a.w, bx + bw) - Math.max(a.x, bx));
  const iy = Math.max(0, Math.min(a.y + a.h, by + bh) - Math.max(a.y, by));
  const inter = ix * iy;
  return inter / (a.w * a.h + bw * bh - inter);
}

/** Fraction of the box's pixels covered by the union of the regions. */
export function coverage(
  regions: Region[],
  box: [number, number, number, number]
): number {
  const [bx, by, bw, bh] = box;
  let covered = 0;
  for (let y = by; y < by + bh; y++) {
    for (let x = bx; x < bx + bw; x++) {
      if (regions.some((r) => x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h)) {
        covered++;
      }
    }
  }
  return covered / (bw * bh);
}

/** Solid-colour bitmap for synthetic cases. */
export function makeBitmap(
  width: number,
  height: number,
  rgb: [number, number, number]
): Bitmap {
  const data = new Uint8Array(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    data[i * 4] = rgb[0];
    data[i * 4 + 1] = rgb[1];
    data[i * 4 + 2] = rgb[2];
    data[i * 4 + 3] = 255;
  }
  return { width, height, data };
}

export function paintRect(
  img: Bitmap,
  x0: number,
  y0: number,
  w: number,
  h: number,
  rgb: [number, number, number]
): void {
  for (let y = y0; y < y0 + h; y++) {
    for (let x = x0; x < x0 + w; x++) {
      const p = (y * img.width + x) * 4;
      img.data[p] = rgb[0];
      img.data[p + 1] = rgb[1];
      img.data[p + 2] = rgb[2];
    }
  }
}
