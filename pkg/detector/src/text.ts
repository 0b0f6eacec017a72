import { Bitmap, connectedComponents, medianLuma } from "./image";
import { Region, textRegion } from "./schema";

const PAGE_LUMA = 170;
const INK_LUMA = 128;
const MIN_COMPONENT_AREA = 30;
const MIN_ASPECT = 1.5;
const MIN_FILL = 0.15;
const BOX_PAD = 2;

/** Dark pixels with horizontal gaps bridged so a word becomes one blob. */
function inkMask(img: Bitmap, gap: number): Uint8Array {
  const { width, height } = img;
  const mask = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    let lastInk = -gap - 1;
    for (let x = 0; x < width; x++) {
      const p = (y * width + x) * 4;
      const l =
        0.299 * img.data[p] + 0.587 * img.data[p + 1] + 0.114 * img.data[p + 2];
      if (l < INK_LUMA) {
        if (x - lastInk <= gap) {
          for (let fill = lastInk + 1; fill < x; fill++) {
            mask[y * width + fill] = 1;
          }
        }
        mask[y * width + x] = 1;
        lastInk = x;
      }
    }
  }
  return mask;
}

export function findTextRegions(img: Bitmap): Region[] {
  // Dark-on-light only. A photo does not get text boxes from shadows.
  if (medianLuma(img) < PAGE_LUMA) {
    return [];
  }
  const gap = Math.max(2, Math.round(img.width / 25));
  const mask = inkMask(img, gap);
  const regions: Region[] = [];
  for (const blob of connectedComponents(mask, img.width, img.height, MIN_COMPONENT_AREA)) {
    const w = blob.x1 - blob.x0;
    const h = blob.y1 - blob.y0;
    if (w / h < MIN_ASPECT || h > img.height / 2) {
      continue;
    }
    if (blob.area / (w * h) < MIN_FILL) {
      continue;
    }
    const x0 = Math.max(blob.x0 - BOX_PAD, 0);
    const y0 = Math.max(blob.y0 - BOX_PAD, 0);
    const x1 = Math.min(blob.x1 + BOX_PAD, img.width);
    const y1 = Math.min(blob.y1 + BOX_PAD, img.height);
    regions.push(textRegion(x0, y0, x1 - x0, y1 - y0));
  }
  return regions;
}
