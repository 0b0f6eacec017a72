#!/usr/bin/env node
import { existsSync, readdirSync, statSync, writeFileSync } from "fs";
import * as path from "path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { findFaces } from "./faces";
import { readJpeg } from "./image";
import { DetectionEntry, detectionsSchema, renderDetections } from "./schema";
import { findTextRegions } from "./text";
import { SampledFrame, inferStride, propagateRegions } from "./video";

const IMAGE_EXT = new Set([".jpg", ".jpeg"]);
const VIDEO_EXT = new Set([".mp4", ".avi", ".mov"]);

function* walk(dir: string): Generator<string> {
  for (const name of readdirSync(dir).sort()) {
    const full = path.join(dir, name);
    if (statSync(full).isDirectory()) {
      yield* walk(full);
    } else {
      yield full;
    }
  }
}

function relPosix(root: string, file: string): string {
  return path.relative(root, file).split(path.sep).join("/");
}

function detectImage(file: string) {
  const img = readJpeg(file);
  return [...findFaces(img), ...findTextRegions(img)];
}

/**
 * Stills under `<clip>.frames/<n>.jpg` stand in for the decoded video.
 * Whoever extracts them picks the sampling stride; detections on the
 * stills are propagated over the frames in between.
 */
function detectVideo(file: string): ReturnType<typeof propagateRegions> {
  const framesDir = file.slice(0, -path.extname(file).length) + ".frames";
  if (!existsSync(framesDir)) {
    console.error(`no decoder for ${path.basename(file)}; emitting no regions`);
    return [];
  }
  const samples: SampledFrame[] = [];
  for (const still of readdirSync(framesDir).sort()) {
    const n = Number.parseInt(path.parse(still).name, 10);
    if (!Number.isInteger(n) || n < 0) {
      continue;
    }
    samples.push({ frame: n, regions: detectImage(path.join(framesDir, still)) });
  }
  return propagateRegions(samples, inferStride(samples.map((s) => s.frame)));
}

export function detectPackage(inputDir: string): DetectionEntry[] {
  const entries: DetectionEntry[] = [];
  for (const file of walk(inputDir)) {
    const rel = relPosix(inputDir, file);
    if (rel.split("/").some((part) => part.endsWith(".frames"))) {
      continue; // extracted stills are inputs, not package media
    }
    const ext = path.extname(file).toLowerCase();
    if (IMAGE_EXT.has(ext)) {
      try {
        entries.push({ file: rel, regions: detectImage(file) });
      } catch (err) {
        console.error(`cannot decode ${rel}: ${err}; emitting no regions`);
        entries.push({ file: rel, regions: [] });
      }
    } else if (VIDEO_EXT.has(ext)) {
      entries.push({ file: rel, regions: detectVideo(file) });
    }
  }
  return entries;
}

export function runDetect(input: string, output: string): number {
  if (!existsSync(input) || !statSync(input).isDirectory()) {
    console.error(`input is not a directory: ${input}`);
    return 1;
  }
  const entries = detectionsSchema.parse(detectPackage(input));
  writeFileSync(output, renderDetections(entries));
  const regions = entries.reduce((n, e) => n + e.regions.length, 0);
  console.log(`${entries.length} media file(s), ${regions} region(s) -> ${output}`);
  return 0;
}

if (require.main === module) {
  const argv = yargs(hideBin(process.argv))
    .option("input", {
      alias: "i",
      type: "string",
      demandOption: true,
      describe: "unpacked package directory",
    })
    .option("output", {
      alias: "o",
      type: "string",
      demandOption: true,
      describe: "detections JSON to write",
    })
    .strict()
    .parseSync();
  process.exit(runDetect(argv.input, argv.output));
}
