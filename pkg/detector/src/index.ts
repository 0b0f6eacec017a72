export { findFaces, countLandmarks } from "./faces";
export { findTextRegions } from "./text";
export { readJpeg, connectedComponents, medianLuma } from "./image";
export type { Bitmap, Blob } from "./image";
export { propagateRegions, inferStride } from "./video";
export type { SampledFrame } from "./video";
export {
  detectionsSchema,
  entrySchema,
  regionSchema,
  renderDetections,
  faceRegion,
  textRegion,
} from "./schema";
export type { DetectionEntry, Region } from "./schema";
export { detectPackage, runDetect } from "./cli";
