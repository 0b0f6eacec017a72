import { z } from "zod";

// Mirrors the detections file the de-identification tool consumes:
// a list of {file, regions}, pixel boxes, frame index only for a
// single video frame. Booleans are not valid coordinates.
export const regionSchema = z
  .object({
    kind: z.enum(["face", "text"]),
    frame: z.number().int().nonnegative().nullable(),
    x: z.number().int(),
    y: z.number().int(),
    w: z.number().int().positive(),
    h: z.number().int().positive(),
    landmarks_visible: z.number().int().nonnegative().optional(),
  })
  .strict();

export const entrySchema = z
  .object({
    file: z.string().min(1),
    regions: z.array(regionSchema),
  })
  .strict();

export const detectionsSchema = z.array(entrySchema);

export type Region = z.infer<typeof regionSchema>;
export type DetectionEntry = z.infer<typeof entrySchema>;

export function faceRegion(
  x: number,
  y: number,
  w: number,
  h: number,
  landmarksVisible: number,
  frame: number | null = null
): Region {
  return { kind: "face", frame, x, y, w, h, landmarks_visible: landmarksVisible };
}

export function textRegion(
  x: number,
  y: number,
  w: number,
  h: number,
  frame: number | null = null
): Region {
  return { kind: "text", frame, x, y, w, h };
}

/** Serialize with a fixed field order so files diff cleanly. */
export function renderDetections(entries: DetectionEntry[]): string {
  const ordered = entries.map((entry) => ({
    file: entry.file,
    regions: entry.regions.map((r) => {
      const out: Record<string, unknown> = {
        kind: r.kind,
        frame: r.frame,
        x: r.x,
        y: r.y,
        w: r.w,
        h: r.h,
      };
      if (r.landmarks_visible !== undefined) {
        out.landmarks_visible = r.landmarks_visible;
      }
      return out;
    }),
  }));
  return JSON.stringify(ordered, null, 2) + "\n";
}
