"""Command line interface.

deid run  de-identifies one or more packages into an output folder
deid eval scores a finished run against planted ground truth
deid gen  writes a synthetic corpus with known ground truth

Exit codes: 0 on success, 1 when the input is unusable, 2 when an
internal guarantee broke.  A failed run removes whatever partial output
it had written; inputs are never modified.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

from .config import (
    default_discard_list,
    default_exempt_labels,
    default_name_list_lines,
    default_sender_labels,
    read_list_file,
)
from .corpus import CorpusSpec, generate_corpus
from .errors import FatalInputError, InvariantError
from .evaluation import count_outcomes, load_ground_truth, render_report
from .extract import (
    NameList,
    extract_freetext_usernames,
    extract_profile,
    extract_structured,
    load_name_list,
    scan_names,
)
from .ingest import EntryKind, filter_entries, group_inputs, unpack_ddp
from .keymap import build_keymap, load_keys, load_participant_file, save_keys
from .media import deidentify_image, deidentify_video, load_detections
from .textdeid import RewriteReport, TextDeidentifier, deidentify_paths

log = logging.getLogger(__name__)

REPORT_NAME = "replacement_report.csv"


@dataclass
class RunConfig:
    inputs: list[Path]
    output_dir: Path
    participants: Path | None = None
    names: Path | None = None
    cap_sensitive: bool = False
    salt: bytes | None = None
    save_keys: Path | None = None
    detections: Path | None = None
    skip_media: bool = False
    discard_list: Path | None = None
    exempt_labels: Path | None = None
    sender_labels: Path | None = None


@dataclass
class RunSummary:
    packages: int
    files: int
    replacements: int
    keymap_entries: int
    renames: int


def _validate_layout(cfg: RunConfig) -> None:
    out = cfg.output_dir.resolve()
    for path in cfg.inputs:
        if not path.exists():
            raise FatalInputError(f"input {path} does not exist")
        src = path.resolve()
        if src == out or out.is_relative_to(src):
            raise FatalInputError("output directory must lie outside every input")
        if path.is_dir() and src.is_relative_to(out):
            raise FatalInputError(f"input {path} lies inside the output directory")


def run_deid(cfg: RunConfig) -> RunSummary:
    _validate_layout(cfg)
    discard = (
        read_list_file(cfg.discard_list) if cfg.discard_list else default_discard_list()
    )
    senders = (
        set(read_list_file(cfg.sender_labels))
        if cfg.sender_labels
        else default_sender_labels()
    )
    exempt = (
        set(read_list_file(cfg.exempt_labels))
        if cfg.exempt_labels
        else default_exempt_labels()
    )
    participants = load_participant_file(cfg.participants) if cfg.participants else []
    name_lines = read_list_file(cfg.names) if cfg.names else default_name_list_lines()
    names = load_name_list(name_lines, cap_sensitive=cfg.cap_sensitive)
    # Participant names are known exactly; they join the scan list.
    extra = {p.name.lower() for p in participants if p.name}
    names = NameList(names=names.names | extra, cap_sensitive=cfg.cap_sensitive)
    detections = load_detections(cfg.detections) if cfg.detections else {}

    output_existed = cfg.output_dir.exists()
    created: list[Path] = []
    with tempfile.TemporaryDirectory(prefix="ddpdeid-") as tmp:
        packages = []
        for ddp_id, paths in sorted(group_inputs(cfg.inputs).items()):
            pkg = unpack_ddp(paths, Path(tmp))
            pkg = filter_entries(pkg, discard)
            packages.append(pkg)

        if not cfg.skip_media and cfg.detections is None:
            with_media = [p.ddp_id for p in packages if p.media()]
            if with_media:
                raise FatalInputError(
                    "packages contain media but no detections were given; "
                    f"pass --detections or --skip-media (affected: {', '.join(with_media)})"
                )

        matches = []
        for pkg in packages:
            for entry in pkg.structured():
                source = f"{pkg.ddp_id}/{entry.rel_path}"
                text = pkg.abs_path(entry).read_text(encoding="utf-8")
                try:
                    doc = json.loads(text)
                except json.JSONDecodeError:
                    log.warning("%s is not valid JSON; pattern scan only", source)
                    doc = None
                if doc is not None:
                    if entry.basename == "profile.json":
                        matches.extend(extract_profile(doc, pkg.ddp_id, source))
                    matches.extend(extract_structured(doc, source, senders, exempt))
                matches.extend(extract_freetext_usernames(text, source))
                matches.extend(scan_names(text, names, source))

        keymap = build_keymap(matches, participants, salt=cfg.salt)
        deider = TextDeidentifier(keymap, cap_sensitive=cfg.cap_sensitive)
        report = RewriteReport()
        summary = RunSummary(
            packages=len(packages),
            files=0,
            replacements=0,
            keymap_entries=len(keymap),
            renames=0,
        )

        try:
            cfg.output_dir.mkdir(parents=True, exist_ok=True)
            for pkg in packages:
                out_root = cfg.output_dir / pkg.ddp_id
                # The root gets renamed at the end of the package, so a
                # rerun into the same folder collides on the final name.
                final_root = cfg.output_dir / deider.rename(pkg.ddp_id)
                for occupied in {out_root, final_root}:
                    if occupied.exists():
                        raise FatalInputError(
                            f"output for {pkg.ddp_id} already exists at {occupied}"
                        )
                created.append(out_root)
                for entry in pkg.entries:
                    src = pkg.abs_path(entry)
                    dst = out_root / entry.rel_path
                    if entry.kind is EntryKind.DISCARD:
                        continue
                    dst.parent.mkdir(parents=True, exist_ok=True)
                    if entry.kind is EntryKind.STRUCTURED_TEXT:
                        new_text, counts = deider.apply(src.read_text(encoding="utf-8"))
                        dst.write_text(new_text, encoding="utf-8")
                        report.add(pkg.ddp_id, entry.rel_path, counts)
                        summary.files += 1
                    elif cfg.skip_media:
                        log.info("skipping media file %s/%s", pkg.ddp_id, entry.rel_path)
                    else:
                        regions = detections.get(
                            f"{pkg.ddp_id}/{entry.rel_path}", detections.get(entry.rel_path, [])
                        )
                        if entry.kind is EntryKind.IMAGE:
                            deidentify_image(src, dst, regions)
                        else:
                            deidentify_video(src, dst, regions)
                        summary.files += 1
                _, renames = deidentify_paths(out_root, deider)
                summary.renames += renames
            report.write(cfg.output_dir / REPORT_NAME)
            created.append(cfg.output_dir / REPORT_NAME)
            if cfg.save_keys:
                save_keys(keymap, cfg.save_keys, include_salt=True)
        except BaseException:
            _cleanup(cfg.output_dir, created, output_existed)
            raise

    summary.replacements = report.total()
    return summary


def _cleanup(output_dir: Path, created: list[Path], output_existed: bool) -> None:
    if not output_existed:
        shutil.rmtree(output_dir, ignore_errors=True)
        return
    for path in created:
        if path.is_dir():
            shutil.rmtree(path, ignore_errors=True)
        else:
            path.unlink(missing_ok=True)


def _cmd_run(args: argparse.Namespace) -> int:
    salt = None
    if args.salt is not None:
        try:
            salt = bytes.fromhex(args.salt)
        except ValueError as exc:
            raise FatalInputError(f"--salt must be hex, got {args.salt!r}") from exc
        if not salt:
            raise FatalInputError("--salt must not be empty")
    cfg = RunConfig(
        inputs=[Path(p) for p in args.input],
        output_dir=Path(args.output),
        participants=_opt_path(args.participants),
        names=_opt_path(args.names),
        cap_sensitive=args.cap_sensitive,
        salt=salt,
        save_keys=_opt_path(args.save_keys),
        detections=_opt_path(args.detections),
        skip_media=args.skip_media,
        discard_list=_opt_path(args.discard_list),
        exempt_labels=_opt_path(args.exempt_labels),
        sender_labels=_opt_path(args.sender_labels),
    )
    summary = run_deid(cfg)
    print(
        f"de-identified {summary.packages} package(s), {summary.files} file(s): "
        f"{summary.replacements} replacement(s), {summary.keymap_entries} key(s), "
        f"{summary.renames} rename(s)"
    )
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    from .evaluation import f1, precision, recall

    keymap = load_keys(Path(args.keys))
    ground_truth = load_ground_truth(Path(args.ground_truth))
    report_path = Path(args.deid) / REPORT_NAME
    report = RewriteReport.load(report_path)
    outcomes = count_outcomes(Path(args.raw), Path(args.deid), keymap, ground_truth, report)
    render_report(outcomes, Path(args.report))

    def fmt(value: float | None) -> str:
        return "-" if value is None else f"{value:.4f}"

    for category, (tp, fn, fp) in sorted(outcomes.by_category().items()):
        r, p = recall(tp, fn), precision(tp, fp)
        print(
            f"{category}: total={tp + fn} tp={tp} fn={fn} fp={fp} "
            f"recall={fmt(r)} precision={fmt(p)} f1={fmt(f1(p, r))}"
        )
    print(f"metrics written to {args.report}")
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    spec = CorpusSpec()
    if args.spec:
        try:
            overrides = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        except OSError as exc:
            raise FatalInputError(f"cannot read spec {args.spec}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise FatalInputError(f"spec {args.spec} is not valid JSON: {exc}") from exc
        unknown = set(overrides) - {f.name for f in CorpusSpec.__dataclass_fields__.values()}
        if unknown:
            raise FatalInputError(f"unknown corpus spec fields: {sorted(unknown)}")
        spec = replace(spec, **overrides)
    result = generate_corpus(Path(args.out), seed=args.seed, spec=spec)
    print(
        f"generated {len(result.ddp_ids)} package(s) with "
        f"{result.total_instances} planted values under {result.out_dir}"
    )
    return 0


def _opt_path(value: str | None) -> Path | None:
    return Path(value) if value is not None else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deid", description="De-identify social media data download packages."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="de-identify packages")
    run_p.add_argument(
        "-i", "--input", action="append", required=True,
        help="package zip or folder; repeat for several packages or parts",
    )
    run_p.add_argument("-o", "--output", required=True, help="output directory")
    run_p.add_argument("--participants", help="CSV of study participants and their ids")
    run_p.add_argument("--names", help="first-name list, one name per line")
    run_p.add_argument(
        "--cap-sensitive", action="store_true",
        help="only treat capitalised occurrences of list names as names",
    )
    run_p.add_argument("--salt", help="hex salt for stable replacement codes")
    run_p.add_argument("--save-keys", help="write the key file here")
    run_p.add_argument("--detections", help="JSON with face/text regions to blur")
    run_p.add_argument("--skip-media", action="store_true", help="leave photos and videos out")
    run_p.add_argument("--discard-list", help="file names to drop, one per line")
    run_p.add_argument("--exempt-labels", help="labels whose values are never extracted")
    run_p.add_argument("--sender-labels", help="labels whose values are usernames")
    run_p.set_defaults(func=_cmd_run)

    eval_p = sub.add_parser("eval", help="score a run against ground truth")
    eval_p.add_argument("--raw", required=True, help="folder with the original packages")
    eval_p.add_argument("--deid", required=True, help="output folder of deid run")
    eval_p.add_argument("--keys", required=True, help="key file saved by the run")
    eval_p.add_argument("--ground-truth", required=True, help="planted labels TSV")
    eval_p.add_argument("--report", required=True, help="where to write the metric CSV")
    eval_p.set_defaults(func=_cmd_eval)

    gen_p = sub.add_parser("gen", help="generate a synthetic corpus")
    gen_p.add_argument("--seed", type=int, default=7)
    gen_p.add_argument("--out", required=True, help="corpus output directory")
    gen_p.add_argument("--spec", help="JSON overriding corpus spec fields")
    gen_p.set_defaults(func=_cmd_gen)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FatalInputError as exc:
        log.error("%s", exc)
        return 1
    except InvariantError as exc:
        log.error("%s", exc)
        return 2
    except Exception:  # pragma: no cover - last resort
        log.exception("unexpected failure")
        return 2


if __name__ == "__main__":
    sys.exit(main())
