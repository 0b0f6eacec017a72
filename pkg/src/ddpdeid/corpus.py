"""Synthetic data download packages with exact ground truth.

The generator plants every piece of personal data deliberately and
writes down where it put each one, so a de-identification run over the
generated packages can be scored without any hand labelling.  Planted
data is shaped to match what the extraction rules can find; distractor
content (public URLs, exempt-labelled structures, timestamps, plain
chatter) is shaped so that no rule may fire on it.  Everything is
driven by one seeded RNG and archives are written with fixed metadata,
so the same seed yields byte-identical output.

Dict labels that carry timestamp strings are restricted to 'taken_at',
which sits on the default exempt list; any other label paired with a
timestamp would itself be extracted as a username.  Timestamps always
use the 'T' separator: with a space, the date-plus-hour digit run is
long enough to look like a phone number.
"""

from __future__ import annotations

import dataclasses
import io
import json
import random
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .extract import Category, load_name_list
from .media import Region, RegionKind, write_detections

_ZIP_DATE = (2020, 10, 21, 12, 0, 0)

_USERNAME_PREFIXES = [
    "sunny", "blue", "urban", "retro", "pixel", "mellow", "nova", "lazy",
    "turbo", "cosmic", "velvet", "salty", "noble", "witty", "zesty", "misty",
]
_USERNAME_STEMS = [
    "dolphin", "falcon", "otter", "willow", "cactus", "comet", "badger",
    "maple", "raven", "tulip", "walrus", "ember", "fjord", "lychee",
    "quokka", "sparrow",
]
# Surnames stay off the first-name list so a bare surname never matches.
_SURNAMES = [
    "Vries", "Bakker", "Visser", "Smit", "Meijer", "Mulder", "Bos",
    "Dekker", "Hendriks", "Kuipers",
]
_NOISE = [
    "ga je mee morgen",
    "haha echt wel",
    "tot zo",
    "is goed hoor",
    "wat een dag zeg",
    "zin in het weekend",
    "heb je het al gezien",
    "kom je ook vanavond",
    "lekker weertje vandaag",
    "ik app je straks wel",
    "dat was echt grappig",
    "even koffie halen",
    "we zien wel hoe laat",
    "goed plan",
    "top dan doen we dat",
]
_PUBLIC_URLS = [
    "https://nos-nieuws.example/artikel/verkiezingen",
    "https://weerbericht.example/morgen",
    "http://recepten.example.org/pasta?dag=maandag",
    "https://fietsroutes.example.net/utrecht/heuvelrug",
]


@dataclass(frozen=True)
class CorpusSpec:
    n_ddps: int = 5
    n_participants: int = 3
    friends: int = 14
    conversations: int = 2
    messages_per_conversation: int = 16
    likes: int = 22
    follows: int = 16
    comments: int = 10
    stories: int = 3
    lowercase_names_per_ddp: int = 0
    include_media: bool = True


@dataclass(frozen=True)
class Identity:
    username: str
    display_name: str
    email: str
    phone: str
    website: str


@dataclass
class CorpusResult:
    out_dir: Path
    ddp_ids: list[str]
    ddp_archives: list[Path]
    raw_dir: Path
    ground_truth_path: Path
    detections_path: Path
    participants_path: Path
    meta_path: Path
    total_instances: int


class _Bookkeeper:
    """Exact record of what was planted where."""

    def __init__(self, owner_usernames: set[str]):
        self.counts: dict[tuple[str, str, Category, str], int] = {}
        self.owner_usernames = owner_usernames
        self.public_urls: list[tuple[str, str, str]] = []

    def pii(self, ddp: str, file: str, category: Category, value: str, n: int = 1) -> None:
        if category is Category.USERNAME and value.lower() in self.owner_usernames:
            category = Category.DDP_ID
        key = (ddp, file, category, value)
        self.counts[key] = self.counts.get(key, 0) + n

    def public(self, ddp: str, file: str, url: str) -> None:
        self.public_urls.append((ddp, file, url))

    def total(self) -> int:
        return sum(self.counts.values())

    def write_tsv(self, path: Path) -> None:
        lines = []
        for (ddp, file, category, value), n in sorted(
            self.counts.items(), key=lambda kv: (kv[0][0], kv[0][1], str(kv[0][2]), kv[0][3])
        ):
            lines.append(f"{ddp}\t{file}\t{category}\t{value}\t{n}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _make_username(rng: random.Random, used: set[str]) -> str:
    while True:
        shape = rng.randrange(3)
        prefix = rng.choice(_USERNAME_PREFIXES)
        stem = rng.choice(_USERNAME_STEMS)
        if shape == 0:
            handle = f"{prefix}{stem}{rng.randrange(10, 99)}"
        elif shape == 1:
            handle = f"{prefix}_{stem}"
        else:
            handle = f"{prefix}.{stem}{rng.randrange(2, 9)}"
        if handle not in used:
            used.add(handle)
            return handle


def _timestamp(rng: random.Random) -> str:
    return (
        f"2020-{rng.randrange(1, 13):02d}-{rng.randrange(1, 29):02d}"
        f"T{rng.randrange(24):02d}:{rng.randrange(60):02d}:{rng.randrange(60):02d}+00:00"
    )


def _phone(rng: random.Random) -> str:
    body = "".join(str(rng.randrange(10)) for _ in range(8))
    shape = rng.randrange(3)
    if shape == 0:
        return f"+31 6 {body[:4]} {body[4:]}"
    if shape == 1:
        return f"06{body}"
    return f"+316{body}"


def _spell(rng: random.Random, handle: str) -> str:
    # An occasional capitalised spelling; the code must not care.
    return handle.capitalize() if rng.random() < 0.12 else handle


class _TextPlanter:
    """Builds message-like sentences and records what they contain."""

    def __init__(self, rng, book, first_names, friends, extra_emails):
        self.rng = rng
        self.book = book
        self.first_names = first_names
        self.friends = friends
        self.extra_emails = extra_emails

    def sentence(self, ddp: str, file: str, owner: Identity) -> str:
        rng = self.rng
        kind = rng.choices(
            ["plain", "mention", "name", "share", "email", "phone", "insta", "public", "display"],
            weights=[30, 14, 14, 7, 7, 7, 7, 7, 7],
        )[0]
        if kind == "plain":
            return rng.choice(_NOISE)
        if kind == "mention":
            handle = _spell(rng, rng.choice(self.friends))
            self.book.pii(ddp, file, Category.USERNAME, handle)
            return f"@{handle} {rng.choice(['kijk dit eens', 'ga je ook', 'zag je dit'])}"
        if kind == "name":
            name = rng.choice(self.first_names)
            self.book.pii(ddp, file, Category.NAME, name)
            return rng.choice([f"{name} komt ook", f"leuk met {name} gisteren", f"{name} belde net"])
        if kind == "share":
            handle = rng.choice(self.friends)
            self.book.pii(ddp, file, Category.USERNAME, handle)
            return f"Shared {handle}'s story"
        if kind == "email":
            email = rng.choice(self.extra_emails)
            self.book.pii(ddp, file, Category.EMAIL, email)
            return f"mail me op {email}"
        if kind == "phone":
            phone = _phone(rng)
            self.book.pii(ddp, file, Category.PHONE, phone)
            return f"bel {phone} even"
        if kind == "insta":
            handle = rng.choice(self.friends)
            url = f"https://www.instagram.com/{handle}"
            self.book.pii(ddp, file, Category.URL, url)
            return f"kijk {url}"
        if kind == "public":
            url = rng.choice(_PUBLIC_URLS)
            self.book.public(ddp, file, url)
            return f"lees {url}"
        # Display names stay within the owner's own package so a single
        # package can still be scored in isolation.
        self.book.pii(ddp, file, Category.NAME, owner.display_name)
        return f"eet bij {owner.display_name} thuis"

    def lowercase_name(self, ddp: str, file: str) -> str:
        name = self.rng.choice(self.first_names).lower()
        self.book.pii(ddp, file, Category.NAME, name)
        return f"volgens mij zag ik {name} gisteren"


def generate_corpus(
    out_dir: Path, seed: int = 7, spec: CorpusSpec | None = None
) -> CorpusResult:
    spec = spec or CorpusSpec()
    rng = random.Random(seed)
    out_dir = Path(out_dir)
    raw_dir = out_dir / "raw"
    ddp_dir = out_dir / "ddps"
    raw_dir.mkdir(parents=True, exist_ok=True)
    ddp_dir.mkdir(parents=True, exist_ok=True)

    first_names = sorted(n.capitalize() for n in load_name_list().names)
    used_handles: set[str] = set()
    owners = []
    for _ in range(spec.n_ddps):
        username = _make_username(rng, used_handles)
        first = rng.choice(first_names)
        display = f"{first} {rng.choice(_SURNAMES)}"
        owners.append(
            Identity(
                username=username,
                display_name=display,
                email=f"{first.lower()}.{rng.randrange(100, 999)}@voorbeeld.nl",
                phone=_phone(rng),
                website=f"https://www.instagram.com/{username}",
            )
        )
    friends = [_make_username(rng, used_handles) for _ in range(spec.friends)]
    extra_emails = [f"contact{i}@mailbox.example" for i in range(1, 4)]

    book = _Bookkeeper({o.username.lower() for o in owners})
    planter = _TextPlanter(rng, book, first_names, friends, extra_emails)

    ddp_ids = []
    detections: dict[str, list[Region]] = {}
    asset_meta: dict[str, dict] = {}
    archives = []
    for i, owner in enumerate(owners):
        ddp_id = f"{owner.username}_202010{(i % 8) + 21:02d}"
        ddp_ids.append(ddp_id)
        root = raw_dir / ddp_id
        root.mkdir(parents=True, exist_ok=True)
        _write_ddp(root, ddp_id, owner, spec, rng, book, planter, friends)
        if spec.include_media:
            _write_media(root, ddp_id, owner, spec, rng, detections, asset_meta)
        archive = ddp_dir / f"{ddp_id}.zip"
        _zip_tree(root, archive)
        archives.append(archive)

    gt_path = out_dir / "ground_truth.tsv"
    book.write_tsv(gt_path)
    det_path = out_dir / "detections.json"
    write_detections(detections, det_path)

    participants_path = out_dir / "participants.csv"
    lines = ["username,name,participant_id"]
    for i, owner in enumerate(owners[: spec.n_participants]):
        lines.append(f"{owner.username},{owner.display_name},PP{i + 1:02d}")
    participants_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    meta_path = out_dir / "corpus_meta.json"
    meta = {
        "seed": seed,
        "spec": dataclasses.asdict(spec),
        "ddp_ids": ddp_ids,
        "owners": [dataclasses.asdict(o) for o in owners],
        "friends": friends,
        "public_urls": [list(t) for t in book.public_urls],
        "assets": asset_meta,
        "total_instances": book.total(),
    }
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")

    return CorpusResult(
        out_dir=out_dir,
        ddp_ids=ddp_ids,
        ddp_archives=archives,
        raw_dir=raw_dir,
        ground_truth_path=gt_path,
        detections_path=det_path,
        participants_path=participants_path,
        meta_path=meta_path,
        total_instances=book.total(),
    )


def _write_ddp(root, ddp_id, owner, spec, rng, book, planter, friends):
    def dump(rel: str, doc) -> None:
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(doc, indent=2, ensure_ascii=False), encoding="utf-8")

    profile = {
        "biography": rng.choice(_NOISE),
        "username": owner.username,
        "name": owner.display_name,
        "email": owner.email,
        "phone_number": owner.phone,
        "website": owner.website,
        "is_private": rng.random() < 0.5,
    }
    dump("profile.json", profile)
    book.pii(ddp_id, "profile.json", Category.DDP_ID, owner.username)
    book.pii(ddp_id, "profile.json", Category.NAME, owner.display_name)
    book.pii(ddp_id, "profile.json", Category.EMAIL, owner.email)
    book.pii(ddp_id, "profile.json", Category.PHONE, owner.phone)
    book.pii(ddp_id, "profile.json", Category.URL, owner.website)

    conversations = []
    lowercase_left = spec.lowercase_names_per_ddp
    for _ in range(spec.conversations):
        friend = rng.choice(friends)
        file = "messages.json"
        book.pii(ddp_id, file, Category.USERNAME, owner.username)
        book.pii(ddp_id, file, Category.USERNAME, friend)
        messages = []
        for m in range(spec.messages_per_conversation):
            sender = owner.username if m % 2 == 0 else friend
            spelled = _spell(rng, sender)
            book.pii(ddp_id, file, Category.USERNAME, spelled)
            if lowercase_left > 0 and m % 5 == 4:
                text = planter.lowercase_name(ddp_id, file)
                lowercase_left -= 1
            else:
                text = planter.sentence(ddp_id, file, owner)
            messages.append({"sender": spelled, "taken_at": _timestamp(rng), "text": text})
        conversations.append({"participants": [owner.username, friend], "messages": messages})
    dump("messages.json", {"conversations": conversations})

    media_likes = []
    comment_likes = []
    for j in range(spec.likes):
        handle = rng.choice(friends + [owner.username])
        target = media_likes if j % 3 else comment_likes
        target.append([_timestamp(rng), handle])
        book.pii(ddp_id, "likes.json", Category.USERNAME, handle)
    dump("likes.json", {"media_likes": media_likes, "comment_likes": comment_likes})

    half = spec.follows // 2
    followers = rng.sample(friends, min(half, len(friends)))
    following = rng.sample(friends, min(spec.follows - half, len(friends)))
    for handle in followers + following:
        book.pii(ddp_id, "connections.json", Category.USERNAME, handle)
    dump(
        "connections.json",
        {
            "followers": {h: _timestamp(rng) for h in followers},
            "following": {h: _timestamp(rng) for h in following},
        },
    )

    media_comments = []
    for _ in range(spec.comments):
        handle = rng.choice(friends)
        text = planter.sentence(ddp_id, "comments.json", owner)
        media_comments.append([_timestamp(rng), text, handle])
        book.pii(ddp_id, "comments.json", Category.USERNAME, handle)
    dump("comments.json", {"media_comments": media_comments})

    stories = []
    for s in range(spec.stories):
        caption = planter.sentence(ddp_id, "stories.json", owner)
        uri = f"stories/clip_{s + 1:04d}.mp4" if s == 0 else f"photos/img_{s + 1:04d}.jpg"
        stories.append(
            {"uri": uri, "taken_at": _timestamp(rng), "caption": caption, "type": "story"}
        )
    dump("stories.json", {"stories": stories})

    impressions = [
        {
            "media_url": f"https://cdn{k}.example-media.net/v/{rng.randrange(10**7):07d}",
            "taken_at": _timestamp(rng),
            "type": "photo",
        }
        for k in range(1, 5)
    ]
    for item in impressions:
        book.public(ddp_id, "seen_content.json", item["media_url"])
    dump("seen_content.json", {"impressions": impressions})

    # Epoch-style integers are deliberately absent: a bare run of nine or
    # more digits in the raw text is indistinguishable from a phone number.
    dump(
        "devices.json",
        {
            "devices": [
                {
                    "device_id": f"android-{rng.randrange(16**8):08x}",
                    "os_version": rng.randrange(9, 15),
                    "login_count": rng.randrange(2000),
                }
            ]
        },
    )

    # Files the pipeline must drop: browser-injected stores and a stray
    # text file of an unsupported type.
    dump(
        "autofill.json",
        {"autofill": {"email": "leak@voorbeeld.nl", "phone": "+31 6 9988 7766"}},
    )
    (root / "notes.txt").write_text("niet relevant\n", encoding="utf-8")


def _face_pixels(rng: random.Random, width: int, height: int):
    """A cartoon face: skin-tone ellipse with five dark landmarks."""
    y, x = np.mgrid[0:height, 0:width]
    base = (40 + 30 * (x / width) + 20 * (y / height)).astype(np.uint8)
    img = np.stack([base + 20, base + 40, base + 60], axis=-1).astype(np.uint8)
    cx, cy = width // 2, height // 2
    rx, ry = int(width * 0.22), int(height * 0.32)
    face = ((x - cx) / rx) ** 2 + ((y - cy) / ry) ** 2 <= 1.0
    img[face] = (224, 172, 135)
    def dot(px, py, r, colour):
        mask = (x - px) ** 2 + (y - py) ** 2 <= r * r
        img[mask] = colour
    eye_dx, eye_dy = int(rx * 0.45), int(ry * 0.35)
    dot(cx - eye_dx, cy - eye_dy, max(2, rx // 8), (25, 20, 20))
    dot(cx + eye_dx, cy - eye_dy, max(2, rx // 8), (25, 20, 20))
    dot(cx, cy, max(2, rx // 10), (90, 50, 40))
    dot(cx - eye_dx // 2, cy + eye_dy, max(2, rx // 10), (60, 25, 25))
    dot(cx + eye_dx // 2, cy + eye_dy, max(2, rx // 10), (60, 25, 25))
    box = (cx - rx, cy - ry, 2 * rx, 2 * ry)
    return img, box


def _text_pixels(width: int, height: int):
    """Dark block capitals on a light background."""
    from PIL import Image, ImageDraw, ImageFont

    img = Image.new("RGB", (width, height), (245, 243, 238))
    draw = ImageDraw.Draw(img)
    font = ImageFont.load_default(size=max(16, height // 3))
    message = "GEHEIM"
    origin = (width // 10, height // 4)
    bbox = draw.textbbox(origin, message, font=font)
    draw.text(origin, message, fill=(15, 15, 20), font=font)
    x0 = max(bbox[0], 0)
    y0 = max(bbox[1], 0)
    x1 = min(bbox[2], width)
    y1 = min(bbox[3], height)
    box = (x0, y0, x1 - x0, y1 - y0)
    return np.asarray(img), box


def _save_jpeg(pixels: np.ndarray, path: Path) -> None:
    from PIL import Image

    buffer = io.BytesIO()
    Image.fromarray(pixels, mode="RGB").save(buffer, format="JPEG", quality=90)
    path.write_bytes(buffer.getvalue())


def _write_media(root, ddp_id, owner, spec, rng, detections, asset_meta):
    photos = root / "photos"
    stories = root / "stories"
    photos.mkdir(exist_ok=True)
    stories.mkdir(exist_ok=True)

    face_px, face_box = _face_pixels(rng, 160, 120)
    _save_jpeg(face_px, photos / "img_0002.jpg")
    key = f"{ddp_id}/photos/img_0002.jpg"
    detections[key] = [
        Region(RegionKind.FACE, None, *face_box, landmarks_visible=5)
    ]
    asset_meta[key] = {"kind": "face", "box": list(face_box)}

    text_px, text_box = _text_pixels(200, 90)
    _save_jpeg(text_px, photos / "img_0003.jpg")
    key = f"{ddp_id}/photos/img_0003.jpg"
    detections[key] = [Region(RegionKind.TEXT, None, *text_box)]
    asset_meta[key] = {"kind": "text", "box": list(text_box)}

    profile_px, profile_box = _face_pixels(rng, 120, 120)
    _save_jpeg(profile_px, photos / f"{owner.username}_profile.jpg")
    key = f"{ddp_id}/photos/{owner.username}_profile.jpg"
    detections[key] = [
        Region(RegionKind.FACE, None, *profile_box, landmarks_visible=5)
    ]
    asset_meta[key] = {"kind": "face", "box": list(profile_box)}

    # One photo without any detection entry: must be copied byte for byte.
    plain = np.zeros((80, 120, 3), np.uint8)
    plain[:, :, 0] = 40
    plain[:, :, 1] = 90
    plain[:, :, 2] = 130
    _save_jpeg(plain, photos / "landscape_0004.jpg")

    _write_video(stories / "clip_0001.mp4", rng)
    key = f"{ddp_id}/stories/clip_0001.mp4"
    detections[key] = [
        Region(RegionKind.FACE, None, 40, 20, 48, 56, landmarks_visible=5),
        Region(RegionKind.TEXT, 4, 8, 72, 72, 16),
    ]
    asset_meta[key] = {
        "kind": "face",
        "box": [40, 20, 48, 56],
        "frames": 6,
        "text_frame": 4,
        "text_box": [8, 72, 72, 16],
    }


def _write_video(path: Path, rng: random.Random, frames: int = 6) -> None:
    import cv2

    height, width = 96, 128
    writer = cv2.VideoWriter(
        str(path), cv2.VideoWriter_fourcc(*"mp4v"), 10.0, (width, height)
    )
    try:
        for i in range(frames):
            y, x = np.mgrid[0:height, 0:width]
            frame = np.stack(
                [
                    (30 + 20 * i + 40 * x / width) % 255,
                    (60 + 10 * i + 40 * y / height) % 255,
                    np.full((height, width), 90 + 5 * i),
                ],
                axis=-1,
            ).astype(np.uint8)
            face = ((x - 64) / 20) ** 2 + ((y - 48) / 24) ** 2 <= 1.0
            frame[face] = (135, 172, 224)  # BGR skin tone
            if i == 4:
                # one frame carries an on-screen caption bar
                frame[74:86, 10:78] = (235, 235, 235)
                for col in range(14, 74, 6):
                    frame[76:84, col : col + 3] = (25, 25, 25)
            writer.write(frame)
    finally:
        writer.release()


def _zip_tree(root: Path, archive: Path) -> None:
    files = sorted(p for p in root.rglob("*") if p.is_file())
    with zipfile.ZipFile(archive, "w", zipfile.ZIP_DEFLATED) as zf:
        for file in files:
            info = zipfile.ZipInfo(file.relative_to(root).as_posix(), date_time=_ZIP_DATE)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, file.read_bytes())
