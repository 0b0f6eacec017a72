import { Region } from "./schema";

export interface SampledFrame {
  frame: number;
  regions: Region[];
}

/** Smallest positive gap between sampled frame numbers. */
export function inferStride(frames: number[]): number {
  const sorted = [...frames].sort((a, b) => a - b);
  let stride = Infinity;
  for (let i = 1; i < sorted.length; i++) {
    const gap = sorted[i] - sorted[i - 1];
    if (gap > 0 && gap < stride) {
      stride = gap;
    }
  }
  return Number.isFinite(stride) ? stride : 1;
}

/**
 * Spread regions found on sampled frames over the frames in between.
 *
 * Each sample covers the frames from its own index up to (not
 * including) the next sample; the last sample covers `stride` frames.
 * The result is frame-indexed so the blur only touches frames a
 * sample actually vouches for.
 */
export function propagateRegions(samples: SampledFrame[], stride: number): Region[] {
  if (stride < 1 || !Number.isInteger(stride)) {
    throw new Error(`stride must be a positive integer, got ${stride}`);
  }
  const sorted = [...samples].sort((a, b) => a.frame - b.frame);
  for (let i = 1; i < sorted.length; i++) {
    if (sorted[i].frame === sorted[i - 1].frame) {
      throw new Error(`duplicate sampled frame ${sorted[i].frame}`);
    }
  }
  const out: Region[] = [];
  sorted.forEach((sample, i) => {
    const next = i + 1 < sorted.length ? sorted[i + 1].frame : sample.frame + stride;
    for (let frame = sample.frame; frame < next; frame++) {
      for (const region of sample.regions) {
        out.push({ ...region, frame });
      }
    }
  });
  return out;
}
