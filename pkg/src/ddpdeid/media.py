"""Blurring detected regions out of photos and videos.

Detections are supplied externally as a JSON sidecar; this package
never guesses where faces are.  Each region is padded by 10% of its
size on every side (rounded to nearest) and blurred with a Gaussian
whose strength follows the padded patch size.  Media that cannot be
decoded is replaced by an empty placeholder file: passing unreadable
bytes through unchanged could leak exactly the content we failed to
inspect.

Videos are rebuilt frame by frame, which drops any audio track as a
side effect of the writers used here; voices are identifying and there
is no way to de-identify them, so losing audio is the intended
behaviour, not a defect.
"""

from __future__ import annotations

import json
import logging
import shutil
from dataclasses import dataclass
from enum import Enum
from pathlib import Path, PurePosixPath

import numpy as np

from .blur import blur_patch
from .errors import FatalInputError

log = logging.getLogger(__name__)

PAD_FRACTION = 0.10


class RegionKind(Enum):
    FACE = "face"
    TEXT = "text"


@dataclass(frozen=True)
class Region:
    kind: RegionKind
    frame: int | None  # None on images and for all-frame video regions
    x: int
    y: int
    w: int
    h: int
    landmarks_visible: int | None = None


class MediaError(Exception):
    """Decode or encode failure on one media file; not fatal to a run."""


def load_detections(path: Path) -> dict[str, list[Region]]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FatalInputError(f"cannot read detections {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FatalInputError(f"detections {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, list):
        raise FatalInputError(f"detections {path}: expected a top-level list")
    detections: dict[str, list[Region]] = {}
    for i, item in enumerate(payload):
        if not isinstance(item, dict) or "file" not in item or "regions" not in item:
            raise FatalInputError(f"detections {path}: entry {i} needs 'file' and 'regions'")
        file = item["file"]
        if not isinstance(file, str) or not file:
            raise FatalInputError(f"detections {path}: entry {i} has a bad file field")
        pure = PurePosixPath(file)
        if pure.is_absolute() or ".." in pure.parts:
            raise FatalInputError(f"detections {path}: {file!r} escapes the package")
        if file in detections:
            raise FatalInputError(f"detections {path}: duplicate entry for {file!r}")
        if not isinstance(item["regions"], list):
            raise FatalInputError(f"detections {path}: regions of {file!r} must be a list")
        detections[file] = [
            _parse_region(raw, path, file) for raw in item["regions"]
        ]
    return detections


def _parse_region(raw: object, path: Path, file: str) -> Region:
    if not isinstance(raw, dict):
        raise FatalInputError(f"detections {path}: region of {file!r} must be an object")
    try:
        kind = RegionKind(raw["kind"])
    except (KeyError, ValueError) as exc:
        raise FatalInputError(f"detections {path}: {file!r} has a bad region kind") from exc
    frame = raw.get("frame")
    if frame is not None and (type(frame) is not int or frame < 0):
        raise FatalInputError(f"detections {path}: {file!r} has a bad frame index")
    coords = []
    for field_name in ("x", "y", "w", "h"):
        value = raw.get(field_name)
        if type(value) is not int:
            raise FatalInputError(
                f"detections {path}: {file!r} region field {field_name!r} must be an integer"
            )
        coords.append(value)
    if coords[2] < 0 or coords[3] < 0:
        raise FatalInputError(f"detections {path}: {file!r} has negative region size")
    landmarks = raw.get("landmarks_visible")
    if landmarks is not None and (type(landmarks) is not int or landmarks < 0):
        raise FatalInputError(f"detections {path}: {file!r} has bad landmarks_visible")
    return Region(kind, frame, *coords, landmarks_visible=landmarks)


def write_detections(detections: dict[str, list[Region]], path: Path) -> None:
    """Serialise detections with the exact field order consumers rely on."""
    payload = []
    for file in sorted(detections):
        regions = []
        for r in detections[file]:
            entry: dict[str, object] = {
                "kind": r.kind.value,
                "frame": r.frame,
                "x": r.x,
                "y": r.y,
                "w": r.w,
                "h": r.h,
            }
            if r.landmarks_visible is not None:
                entry["landmarks_visible"] = r.landmarks_visible
            regions.append(entry)
        payload.append({"file": file, "regions": regions})
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def padded_box(region: Region, width: int, height: int) -> tuple[int, int, int, int] | None:
    """Clip a region to the frame and grow it by the padding fraction.

    Returns (x0, y0, x1, y1) or None when nothing of the region lies
    inside the frame.
    """
    x0 = max(region.x, 0)
    y0 = max(region.y, 0)
    x1 = min(region.x + region.w, width)
    y1 = min(region.y + region.h, height)
    if x1 <= x0 or y1 <= y0:
        return None
    pad_x = round(PAD_FRACTION * (x1 - x0))
    pad_y = round(PAD_FRACTION * (y1 - y0))
    return (
        max(x0 - pad_x, 0),
        max(y0 - pad_y, 0),
        min(x1 + pad_x, width),
        min(y1 + pad_y, height),
    )


def blur_regions(image: np.ndarray, regions: list[Region]) -> np.ndarray:
    """Return a copy of the image with every region blurred in place."""
    out = image.copy()
    height, width = image.shape[:2]
    for region in regions:
        box = padded_box(region, width, height)
        if box is None:
            log.warning("region %s lies outside the %dx%d frame; skipped", region, width, height)
            continue
        x0, y0, x1, y1 = box
        out[y0:y1, x0:x1] = blur_patch(out[y0:y1, x0:x1])
    return out


def deidentify_image(src: Path, dst: Path, regions: list[Region]) -> str:
    """Blur regions of one photo; returns 'copied', 'blurred' or 'placeholder'.

    Without regions the file is copied byte for byte.  With regions it
    is re-encoded, which also drops camera metadata.
    """
    from PIL import Image, UnidentifiedImageError

    if not regions:
        shutil.copyfile(src, dst)
        return "copied"
    try:
        with Image.open(src) as img:
            mode = img.mode if img.mode in ("RGB", "L") else "RGB"
            pixels = np.asarray(img.convert(mode))
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        log.warning("cannot decode %s (%s); writing empty placeholder", src, exc)
        Path(dst).write_bytes(b"")
        return "placeholder"
    blurred = blur_regions(pixels, regions)
    Image.fromarray(blurred, mode=mode).save(dst, format="JPEG", quality=95)
    return "blurred"


class OpenCvVideoAdapter:
    """Decode and encode via OpenCV; the codec follows the extension."""

    CODECS = {".mp4": "mp4v", ".avi": "FFV1"}

    def read(self, path: Path) -> tuple[list[np.ndarray], float]:
        import cv2

        cap = cv2.VideoCapture(str(path))
        try:
            if not cap.isOpened():
                raise MediaError(f"cannot open video {path}")
            fps = cap.get(cv2.CAP_PROP_FPS)
            frames = []
            while True:
                ok, frame = cap.read()
                if not ok:
                    break
                frames.append(frame)
        finally:
            cap.release()
        if not frames:
            raise MediaError(f"no decodable frames in {path}")
        return frames, fps if fps and fps > 0 else 30.0

    def write(self, path: Path, frames: list[np.ndarray], fps: float) -> None:
        import cv2

        suffix = Path(path).suffix.lower()
        codec = self.CODECS.get(suffix)
        if codec is None:
            raise MediaError(f"no codec configured for {suffix!r}")
        height, width = frames[0].shape[:2]
        writer = cv2.VideoWriter(
            str(path), cv2.VideoWriter_fourcc(*codec), fps, (width, height)
        )
        try:
            if not writer.isOpened():
                raise MediaError(f"cannot encode {path}")
            for frame in frames:
                writer.write(frame)
        finally:
            writer.release()


class ArrayVideoAdapter:
    """Lossless frame store on .npz files, for exact round-trip tests."""

    def read(self, path: Path) -> tuple[list[np.ndarray], float]:
        try:
            with np.load(path) as data:
                return list(data["frames"]), float(data["fps"])
        except (OSError, KeyError, ValueError) as exc:
            raise MediaError(f"cannot read {path}: {exc}") from exc

    def write(self, path: Path, frames: list[np.ndarray], fps: float) -> None:
        np.savez(path, frames=np.stack(frames), fps=fps)


def deidentify_video(src: Path, dst: Path, regions: list[Region], adapter=None) -> str:
    """Blur regions on every frame; returns 'blurred' or 'placeholder'.

    A region with a frame index touches only that frame; frame None
    touches all of them.  The output is always re-encoded, even without
    regions, so no original container data (audio included) survives.
    """
    adapter = adapter or OpenCvVideoAdapter()
    try:
        frames, fps = adapter.read(src)
    except MediaError as exc:
        log.warning("%s; writing empty placeholder", exc)
        Path(dst).write_bytes(b"")
        return "placeholder"
    out_frames = []
    for i, frame in enumerate(frames):
        active = [r for r in regions if r.frame is None or r.frame == i]
        out_frames.append(blur_regions(frame, active) if active else frame)
    adapter.write(dst, out_frames, fps)
    return "blurred"


def has_audio_stream(path: Path) -> bool:
    """Container-level check for an audio track (MP4/MOV and AVI)."""
    data = Path(path).read_bytes()
    suffix = Path(path).suffix.lower()
    if suffix in (".mp4", ".m4v", ".mov"):
        return _mp4_has_audio(data)
    if suffix == ".avi":
        return _avi_has_audio(data)
    log.debug("no audio probe for %s; assuming none", suffix)
    return False


def _mp4_has_audio(data: bytes) -> bool:
    def walk(start: int, end: int) -> bool:
        pos = start
        while pos + 8 <= end:
            size = int.from_bytes(data[pos : pos + 4], "big")
            box_type = data[pos + 4 : pos + 8]
            header = 8
            if size == 1:
                size = int.from_bytes(data[pos + 8 : pos + 16], "big")
                header = 16
            elif size == 0:
                size = end - pos
            if size < header:
                return False
            if box_type in (b"moov", b"trak", b"mdia"):
                if walk(pos + header, min(pos + size, end)):
                    return True
            elif box_type == b"hdlr":
                # version/flags (4) + pre_defined (4), then the handler type
                if data[pos + header + 8 : pos + header + 12] == b"soun":
                    return True
            pos += size
        return False

    return walk(0, len(data))


def _avi_has_audio(data: bytes) -> bool:
    if data[:4] != b"RIFF" or data[8:12] != b"AVI ":
        return False

    def walk(start: int, end: int) -> bool:
        pos = start
        while pos + 8 <= end:
            fourcc = data[pos : pos + 4]
            size = int.from_bytes(data[pos + 4 : pos + 8], "little")
            body_start = pos + 8
            body_end = min(body_start + size, end)
            if fourcc == b"LIST":
                if walk(body_start + 4, body_end):
                    return True
            elif fourcc == b"strh":
                if data[body_start : body_start + 4] == b"auds":
                    return True
            pos = body_start + size + (size & 1)
        return False

    return walk(12, len(data))
