import { Bitmap, Blob, connectedComponents } from "./image";
import { Region, faceRegion } from "./schema";

// Classic RGB skin gate: warm, bright, red-dominant. Good enough for
// frontal faces against non-skin backgrounds, which is all the data
// download media needs; it is not a general face detector.
function isSkin(r: number, g: number, b: number): boolean {
  return r > 95 && g > 40 && b > 20 && r > g && r > b && r - Math.min(g, b) > 15;
}

const MIN_FACE_FRACTION = 0.02;
const DARK_LANDMARK_LUMA = 75;
const MIN_LANDMARK_AREA = 4;
const MIN_LANDMARKS = 2;

function skinMask(img: Bitmap): Uint8Array {
  const mask = new Uint8Array(img.width * img.height);
  for (let i = 0, p = 0; i < mask.length; i++, p += 4) {
    if (isSkin(img.data[p], img.data[p + 1], img.data[p + 2])) {
      mask[i] = 1;
    }
  }
  return mask;
}

/** Dark blobs (eyes, nostrils, mouth) inside a candidate face box. */
export function countLandmarks(img: Bitmap, box: Blob): number {
  const w = box.x1 - box.x0;
  const h = box.y1 - box.y0;
  const dark = new Uint8Array(w * h);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      const p = ((box.y0 + y) * img.width + box.x0 + x) * 4;
      const l =
        0.299 * img.data[p] + 0.587 * img.data[p + 1] + 0.114 * img.data[p + 2];
      if (l < DARK_LANDMARK_LUMA) {
        dark[y * w + x] = 1;
      }
    }
  }
  return connectedComponents(dark, w, h, MIN_LANDMARK_AREA).length;
}

export function findFaces(img: Bitmap): Region[] {
  const mask = skinMask(img);
  const minArea = Math.max(64, Math.round(img.width * img.height * MIN_FACE_FRACTION));
  const regions: Region[] = [];
  for (const blob of connectedComponents(mask, img.width, img.height, minArea)) {
    const landmarks = countLandmarks(img, blob);
    if (landmarks < MIN_LANDMARKS) {
      continue; // skin-coloured but featureless, e.g. an arm or a wall
    }
    regions.push(
      faceRegion(blob.x0, blob.y0, blob.x1 - blob.x0, blob.y1 - blob.y0, landmarks)
    );
  }
  return regions;
}
