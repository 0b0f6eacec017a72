"""Scoring a de-identification run against known ground truth.

For every labelled value the de-identified text is re-scanned: each
occurrence still present counts as a miss, each absent occurrence as a
hit, but only when the expected replacement code actually appears often
enough.  A value that vanished without its code (say, swallowed by the
wrong participant id or by an overlapping replacement) is a miss too;
disappearing is not the same as being de-identified correctly.

False positives come from the run's own replacement counts: whatever
the rewriter replaced beyond the hits the ground truth can explain.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import FatalInputError
from .extract import Category
from .keymap import FIXED_CODES, PiiKeyMap
from .textdeid import RewriteReport, TextDeidentifier

log = logging.getLogger(__name__)

_WORD_CLASS = "A-Za-z0-9_."


@dataclass(frozen=True)
class GroundTruthLabel:
    ddp_id: str
    file: str
    category: Category
    value: str
    count: int


GT_FIELDS = ["ddp_id", "file", "category", "value", "count"]


def load_ground_truth(path: Path) -> list[GroundTruthLabel]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FatalInputError(f"cannot read ground truth {path}: {exc}") from exc
    labels = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if lineno == 1 and parts == GT_FIELDS:
            continue
        if len(parts) != 5:
            raise FatalInputError(f"{path}:{lineno}: expected 5 tab-separated fields")
        ddp_id, file, category_text, value, count_text = parts
        try:
            category = Category(category_text)
        except ValueError as exc:
            raise FatalInputError(f"{path}:{lineno}: unknown category {category_text!r}") from exc
        try:
            count = int(count_text)
        except ValueError as exc:
            raise FatalInputError(f"{path}:{lineno}: bad count {count_text!r}") from exc
        if count <= 0 or not value:
            raise FatalInputError(f"{path}:{lineno}: empty value or non-positive count")
        labels.append(GroundTruthLabel(ddp_id, file, category, value, count))
    return labels


@dataclass
class OutcomeCounts:
    """tp/fn/fp per (package, file, category)."""

    cells: dict[tuple[str, str, str], list[int]] = field(default_factory=dict)

    def _cell(self, ddp: str, file: str, category: Category | str) -> list[int]:
        key = (ddp, file, str(category))
        return self.cells.setdefault(key, [0, 0, 0])

    def add_tp(self, ddp, file, category, n=1):
        self._cell(ddp, file, category)[0] += n

    def add_fn(self, ddp, file, category, n=1):
        self._cell(ddp, file, category)[1] += n

    def add_fp(self, ddp, file, category, n=1):
        self._cell(ddp, file, category)[2] += n

    def by_category(self) -> dict[str, tuple[int, int, int]]:
        totals: dict[str, list[int]] = {}
        for (_, _, category), (tp, fn, fp) in self.cells.items():
            cell = totals.setdefault(category, [0, 0, 0])
            cell[0] += tp
            cell[1] += fn
            cell[2] += fp
        return {c: tuple(v) for c, v in totals.items()}

    def overall(self) -> tuple[int, int, int]:
        tp = fn = fp = 0
        for cell_tp, cell_fn, cell_fp in self.cells.values():
            tp += cell_tp
            fn += cell_fn
            fp += cell_fp
        return tp, fn, fp


def recall(tp: int, fn: int) -> float | None:
    return tp / (tp + fn) if tp + fn else None


def precision(tp: int, fp: int) -> float | None:
    return tp / (tp + fp) if tp + fp else None


def f1(p: float | None, r: float | None) -> float | None:
    if p is None or r is None:
        return None
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def _occurrences(text: str, value: str, category: Category) -> int:
    """Count occurrences of a value, the way it was replaced.

    Usernames match whole words case-insensitively, names whole words
    exactly; emails, phones and URLs count as plain substrings.  The
    JSON-escaped spelling counts too, since that is how non-ASCII values
    sit in raw files.
    """
    spellings = [value]
    escaped = json.dumps(value, ensure_ascii=True)[1:-1]
    if escaped != value:
        spellings.append(escaped)
    total = 0
    for spelling in spellings:
        if category in (Category.USERNAME, Category.DDP_ID, Category.NAME):
            flags = re.IGNORECASE if category is not Category.NAME else 0
            pattern = re.compile(
                f"(?<![{_WORD_CLASS}]){re.escape(spelling)}(?![{_WORD_CLASS}])", flags
            )
            total += len(pattern.findall(text))
        else:
            total += text.count(spelling)
    return total


def count_outcomes(
    raw_root: Path,
    deid_root: Path,
    keymap: PiiKeyMap,
    ground_truth: list[GroundTruthLabel],
    report: RewriteReport,
) -> OutcomeCounts:
    outcomes = OutcomeCounts()
    renamer = TextDeidentifier(keymap, cap_sensitive=False)

    by_file: dict[tuple[str, str], list[GroundTruthLabel]] = {}
    for label in ground_truth:
        by_file.setdefault((label.ddp_id, label.file), []).append(label)

    for (ddp_id, file), labels in sorted(by_file.items()):
        raw_path = Path(raw_root) / ddp_id / file
        deid_path = Path(deid_root).joinpath(
            *(renamer.rename(part) for part in (ddp_id, *file.split("/")))
        )
        text = None
        if not raw_path.is_file():
            log.warning("ground truth references unknown file %s/%s", ddp_id, file)
        elif deid_path.is_file():
            text = deid_path.read_text(encoding="utf-8")
        else:
            log.warning("no de-identified output for %s/%s", ddp_id, file)
        if text is None:
            for label in labels:
                outcomes.add_fn(ddp_id, file, label.category, label.count)
            continue

        by_category: dict[Category, list[GroundTruthLabel]] = {}
        for label in labels:
            by_category.setdefault(label.category, []).append(label)

        for category, rows in by_category.items():
            if category in FIXED_CODES:
                for row in rows:
                    residual = min(_occurrences(text, row.value, category), row.count)
                    outcomes.add_tp(ddp_id, file, category, row.count - residual)
                    outcomes.add_fn(ddp_id, file, category, residual)
                continue
            by_code: dict[str | None, list[GroundTruthLabel]] = {}
            for row in rows:
                by_code.setdefault(keymap.lookup(category, row.value), []).append(row)
            for code, group in by_code.items():
                replaced = 0
                for row in group:
                    residual = min(_occurrences(text, row.value, category), row.count)
                    replaced += row.count - residual
                    outcomes.add_fn(ddp_id, file, category, residual)
                correct = min(replaced, text.count(code)) if code is not None else 0
                outcomes.add_tp(ddp_id, file, category, correct)
                outcomes.add_fn(ddp_id, file, category, replaced - correct)

    # Whatever the run replaced beyond what ground truth explains.
    for (ddp_id, file, category), replaced in report.counts.items():
        tp = outcomes.cells.get((ddp_id, file, category), (0, 0, 0))[0]
        if replaced > tp:
            outcomes.add_fp(ddp_id, file, category, replaced - tp)
    return outcomes


def _format(metric: float | None) -> str:
    return "-" if metric is None else f"{metric:.4f}"


def render_report(outcomes: OutcomeCounts, path: Path) -> None:
    """CSV with one row per package/file/category plus per-category and
    overall totals."""
    lines = ["ddp,file,category,total,tp,fn,fp,recall,precision,f1"]

    def row(ddp: str, file: str, category: str, tp: int, fn: int, fp: int) -> str:
        r = recall(tp, fn)
        p = precision(tp, fp)
        return (
            f"{ddp},{file},{category},{tp + fn},{tp},{fn},{fp},"
            f"{_format(r)},{_format(p)},{_format(f1(p, r))}"
        )

    for (ddp, file, category), (tp, fn, fp) in sorted(outcomes.cells.items()):
        lines.append(row(ddp, file, category, tp, fn, fp))
    for category, (tp, fn, fp) in sorted(outcomes.by_category().items()):
        lines.append(row("all", "all", category, tp, fn, fp))
    tp, fn, fp = outcomes.overall()
    lines.append(row("all", "all", "all", tp, fn, fp))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
