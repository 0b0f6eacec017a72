"""Applying a key map to text content and to file names.

Replacement runs in a fixed order: email pattern, Instagram URL
pattern, key-map entries, phone pattern.  Patterns run regardless of
what extraction found, so a stray email is caught even when no rule
extracted it.  The phone pattern runs last because raw digit runs are
the most ambiguous signal; by then usernames and names, whose digits
could be mistaken for phone fragments, are already replaced by codes
that the pattern cannot match into.

Key-map entries are applied in a single pass with one alternation,
longest entry first, matching case-insensitively on whole words (a word
being a run of letters, digits, underscore or period).  Inside file and
folder names the same entries are applied as plain substrings instead,
because extensions and date suffixes glue onto the key there.
"""

from __future__ import annotations

import json
import logging
import os
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import FatalInputError, InvariantError
from .extract import Category
from .keymap import FIXED_CODES, PiiKeyMap

log = logging.getLogger(__name__)

_WORD_CLASS = "A-Za-z0-9_."

EMAIL_RE = re.compile(
    r"(?<![A-Za-z0-9._%+\-])[A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,}"
)
# Profile and content links on instagram.com, with or without scheme.
# Other hosts are none of our business and must pass through untouched.
INSTAGRAM_URL_RE = re.compile(
    r"(?<![A-Za-z0-9.\-])(?:https?://)?(?:www\.)?instagram\.com/[A-Za-z0-9_./\-?=&%#+]+",
    re.IGNORECASE,
)
# 9 to 15 digits, optionally split by single spaces or dashes. The
# lookbehinds keep it out of longer digit runs, decimals, URL paths and
# query strings; the lookarounds on both ends refuse to start or stop in
# the middle of a longer separated run (card numbers, IBAN tails).
PHONE_RE = re.compile(
    r"(?<![\w.+\-=&/#])(?<!\d[ \-])\+?\d(?:[ \-]?\d){8,14}(?![\d\-])(?![ \-]\d)"
)


@dataclass(frozen=True)
class AnonymizationPatterns:
    email: re.Pattern = EMAIL_RE
    instagram_url: re.Pattern = INSTAGRAM_URL_RE
    phone: re.Pattern = PHONE_RE


DEFAULT_PATTERNS = AnonymizationPatterns()

_CATEGORY_PRIORITY = {
    Category.DDP_ID: 0,
    Category.USERNAME: 1,
    Category.EMAIL: 2,
    Category.PHONE: 3,
    Category.URL: 4,
    Category.NAME: 5,
}


class TextDeidentifier:
    """Compiled replacement machinery for one key map."""

    def __init__(
        self,
        keymap: PiiKeyMap,
        patterns: AnonymizationPatterns = DEFAULT_PATTERNS,
        cap_sensitive: bool = True,
    ):
        self.keymap = keymap
        self.patterns = patterns
        self.cap_sensitive = cap_sensitive
        # alternative spelling (lowercase) -> candidate entries by priority
        self._by_alt: dict[str, list[tuple[Category, str, str]]] = {}
        alts: set[str] = set()
        for category, canon, code in keymap.items():
            for alt in self._spellings(canon):
                self._by_alt.setdefault(alt.lower(), []).append((category, canon, code))
                alts.add(alt)
        for candidates in self._by_alt.values():
            candidates.sort(key=lambda entry: _CATEGORY_PRIORITY[entry[0]])
        if alts:
            body = "|".join(re.escape(a) for a in sorted(alts, key=len, reverse=True))
            self._word_re = re.compile(
                f"(?<![{_WORD_CLASS}])(?:{body})(?![{_WORD_CLASS}])", re.IGNORECASE
            )
            self._substring_re = re.compile(f"(?:{body})", re.IGNORECASE)
        else:
            self._word_re = None
            self._substring_re = None

    @staticmethod
    def _spellings(canon: str) -> list[str]:
        # JSON files hold non-ASCII values in escaped form; match both.
        spellings = [canon]
        escaped = json.dumps(canon, ensure_ascii=True)[1:-1]
        if escaped != canon:
            spellings.append(escaped)
        return spellings

    def _resolve(self, token: str) -> tuple[str, Category] | None:
        candidates = self._by_alt.get(token.lower())
        if candidates is None:
            return None
        for category, canon, code in candidates:
            if (
                category is Category.NAME
                and self.cap_sensitive
                and canon not in self.keymap.exact_names
                and not token[0].isupper()
            ):
                continue
            return code, category
        return None

    def apply(self, text: str) -> tuple[str, Counter]:
        """Replace PII in text content; returns counts per category."""
        counts: Counter = Counter()

        text, n = self.patterns.email.subn(FIXED_CODES[Category.EMAIL], text)
        counts[Category.EMAIL] += n
        text, n = self.patterns.instagram_url.subn(FIXED_CODES[Category.URL], text)
        counts[Category.URL] += n

        if self._word_re is not None:

            def sub(m: re.Match) -> str:
                hit = self._resolve(m.group(0))
                if hit is None:
                    return m.group(0)
                code, category = hit
                counts[category] += 1
                return code

            text = self._word_re.sub(sub, text)

        text, n = self.patterns.phone.subn(FIXED_CODES[Category.PHONE], text)
        counts[Category.PHONE] += n
        return text, counts

    def rename(self, component: str) -> str:
        """Replace key-map entries occurring as substrings of one path
        component."""
        if self._substring_re is None:
            return component

        def sub(m: re.Match) -> str:
            hit = self._resolve(m.group(0))
            return m.group(0) if hit is None else hit[0]

        return self._substring_re.sub(sub, component)


def deidentify_text(
    text: str,
    keymap: PiiKeyMap,
    patterns: AnonymizationPatterns = DEFAULT_PATTERNS,
    cap_sensitive: bool = True,
) -> tuple[str, Counter]:
    return TextDeidentifier(keymap, patterns, cap_sensitive).apply(text)


def deidentify_paths(root: Path, deider: TextDeidentifier) -> tuple[Path, int]:
    """Rename every file and folder under (and including) root whose name
    contains a key-map entry.

    Renaming is planned in full before anything is touched: if two
    entries would end up with the same name, nothing at all is renamed.
    Returns the possibly renamed root and the number of renames.
    """
    root = Path(root)
    paths = sorted(root.rglob("*"), key=lambda p: len(p.parts), reverse=True)
    paths.append(root)

    planned: dict[Path, str] = {}
    by_parent: dict[Path, list[tuple[str, str]]] = {}
    for p in paths:
        new_name = deider.rename(p.name)
        by_parent.setdefault(p.parent, []).append((p.name, new_name))
        if new_name != p.name:
            planned[p] = new_name

    for parent, pairs in by_parent.items():
        finals = Counter(new for _, new in pairs)
        for final_name, n in finals.items():
            if n > 1:
                originals = [old for old, new in pairs if new == final_name]
                raise InvariantError(
                    f"renaming would merge {originals!r} into {final_name!r} "
                    f"under {parent}"
                )
    new_root_name = planned.get(root, root.name)
    if new_root_name != root.name and (root.parent / new_root_name).exists():
        raise InvariantError(
            f"renaming {root.name!r} to {new_root_name!r} would overwrite an "
            "existing entry"
        )

    for p in paths:  # deepest first, so parents move after their children
        new_name = planned.get(p)
        if new_name is not None:
            os.rename(p, p.parent / new_name)
            log.debug("renamed %s -> %s", p, new_name)
    return root.parent / new_root_name, len(planned)


class RewriteReport:
    """Replacement counts per package, file and category."""

    HEADER = ["ddp", "file", "category", "count"]

    def __init__(self):
        self.counts: dict[tuple[str, str, str], int] = {}

    def add(self, ddp: str, file: str, counts: Counter) -> None:
        for category, n in counts.items():
            if n:
                key = (ddp, file, str(category))
                self.counts[key] = self.counts.get(key, 0) + n

    def total(self) -> int:
        return sum(self.counts.values())

    def write(self, path: Path) -> None:
        lines = [",".join(self.HEADER)]
        for (ddp, file, category), n in sorted(self.counts.items()):
            for piece in (ddp, file, category):
                if "," in piece or "\n" in piece or '"' in piece:
                    raise InvariantError(f"path not representable in report: {piece!r}")
            lines.append(f"{ddp},{file},{category},{n}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "RewriteReport":
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise FatalInputError(f"cannot read replacement report {path}: {exc}") from exc
        if not lines or lines[0].split(",") != cls.HEADER:
            raise FatalInputError(f"{path}: missing '{','.join(cls.HEADER)}' header")
        report = cls()
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise FatalInputError(f"{path}:{lineno}: expected 4 fields")
            ddp, file, category, count_text = parts
            try:
                n = int(count_text)
            except ValueError as exc:
                raise FatalInputError(f"{path}:{lineno}: bad count {count_text!r}") from exc
            report.counts[(ddp, file, category)] = n
        return report
