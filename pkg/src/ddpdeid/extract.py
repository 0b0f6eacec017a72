"""Finding personal data in the text of a data download package.

Structured documents (parsed JSON) are walked recursively and three
shapes are recognised: a sender-style label paired with a username, a
username-like label whose value is a timestamp, and a list that pairs
usernames with timestamps.  Free text is additionally scanned for
@-mentions, story-share phrases and first names from a configurable
name list.  The profile document is handled separately because its
labels identify the package owner.

Replacement codes produced by earlier runs are never re-extracted, so
running the pipeline on its own output is a no-op.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

from .config import default_exempt_labels, default_name_list_lines, default_sender_labels

log = logging.getLogger(__name__)


class Category(str, Enum):
    """What kind of personal data a value is."""

    USERNAME = "username"
    NAME = "name"
    EMAIL = "email"
    PHONE = "phone"
    URL = "url"
    DDP_ID = "ddp_id"

    def __str__(self) -> str:  # report/key files carry the bare value
        return self.value


class Rule(str, Enum):
    """Which detection rule produced a match."""

    LABEL_VALUE = "label_value"
    LABELLED_TIMESTAMP = "labelled_timestamp"
    LIST_WITH_TIMESTAMP = "list_with_timestamp"
    FREETEXT_TAG = "freetext_tag"
    FREETEXT_SHARE = "freetext_share"
    NAME_LIST = "name_list"
    PROFILE = "profile"
    PARTICIPANT = "participant"


@dataclass(frozen=True)
class PiiMatch:
    value: str
    category: Category
    source: str
    rule: Rule
    # For a profile display name, the profile username it belongs to.
    alias_of: str | None = None


# Usernames: 3-30 characters drawn from letters, digits, underscore, period.
USERNAME_FORM_RE = re.compile(r"[A-Za-z0-9_.]{3,30}")

# Replacement codes written by this package: two underscores + 16 hex digits,
# or one of the fixed category codes.
CODE_RE = re.compile(r"__[0-9a-f]{16}")
FIXED_CODE_VALUES = frozenset({"__emailaddress", "__phonenumber", "__url"})

_TIMESTAMP_RE = re.compile(
    r"(\d{4})-(\d{2})-(\d{2})[T ]"
    r"(\d{2}):(\d{2})(?::(\d{2})(\.\d+)?)?"
    r"(Z|[+-]\d{2}:?\d{2})?"
)

_TAG_RE = re.compile(r"(?<![A-Za-z0-9_.])@([A-Za-z0-9_.]{3,30})(?![A-Za-z0-9_.])")
_SHARE_RE = re.compile(
    r"(?<![A-Za-z0-9_.])[Ss]hared ([A-Za-z0-9_.]{3,30})['’]s story(?![A-Za-z0-9_.])"
)
_WORD_RE = re.compile(r"[A-Za-z0-9_.]+")


def is_username_like(s: str) -> bool:
    return isinstance(s, str) and USERNAME_FORM_RE.fullmatch(s) is not None


def is_deid_code(s: str) -> bool:
    return s in FIXED_CODE_VALUES or CODE_RE.fullmatch(s) is not None


def is_timestamp(s: str) -> bool:
    """True for ISO-8601 date+time strings, with or without zone offset."""
    if not isinstance(s, str):
        return False
    m = _TIMESTAMP_RE.fullmatch(s)
    if m is None:
        return False
    text = s
    # Python 3.10 fromisoformat is stricter than the wire formats seen in
    # exports: fold Z and compact offsets into +HH:MM and clamp fractional
    # seconds to six digits before validating the calendar fields.
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    text = re.sub(r"([+-]\d{2})(\d{2})$", r"\1:\2", text)
    text = re.sub(r"\.(\d+)", lambda f: "." + f.group(1)[:6].ljust(6, "0"), text)
    try:
        datetime.fromisoformat(text)
    except ValueError:
        return False
    return True


def _username_candidate(value: Any) -> bool:
    return (
        isinstance(value, str)
        and is_username_like(value)
        and not is_deid_code(value)
        and not is_timestamp(value)
    )


def extract_structured(
    doc: Any,
    source: str,
    sender_labels: set[str] | None = None,
    exempt_labels: set[str] | None = None,
) -> list[PiiMatch]:
    """Walk a parsed JSON document and collect username matches.

    Labels on the exempt list suppress matching for their own value but
    not for deeper structures... except that an exempt label's list value
    is not itself scanned as a username/timestamp list.
    """
    senders = default_sender_labels() if sender_labels is None else sender_labels
    exempt = default_exempt_labels() if exempt_labels is None else exempt_labels
    out: list[PiiMatch] = []
    _walk(doc, source, senders, exempt, out)
    return out


def _walk(node: Any, source: str, senders: set[str], exempt: set[str], out: list[PiiMatch]) -> None:
    if isinstance(node, dict):
        for label, value in node.items():
            exempted = label in exempt
            if not exempted:
                _match_pair(label, value, source, out, senders)
            if isinstance(value, dict):
                _walk(value, source, senders, exempt, out)
            elif isinstance(value, list):
                if exempted:
                    for item in value:
                        if isinstance(item, (dict, list)):
                            _walk(item, source, senders, exempt, out)
                else:
                    _walk(value, source, senders, exempt, out)
    elif isinstance(node, list):
        _match_list(node, source, out)
        for item in node:
            if isinstance(item, (dict, list)):
                _walk(item, source, senders, exempt, out)


def _match_pair(label: Any, value: Any, source: str, out: list[PiiMatch], senders: set[str]) -> None:
    if label in senders:
        values = value if isinstance(value, list) else [value]
        for item in values:
            if _username_candidate(item):
                out.append(PiiMatch(item, Category.USERNAME, source, Rule.LABEL_VALUE))
    if (
        isinstance(label, str)
        and is_username_like(label)
        and not is_deid_code(label)
        and isinstance(value, str)
        and is_timestamp(value)
    ):
        out.append(PiiMatch(label, Category.USERNAME, source, Rule.LABELLED_TIMESTAMP))


def _match_list(items: list, source: str, out: list[PiiMatch]) -> None:
    scalars = [x for x in items if not isinstance(x, (dict, list))]
    if not any(isinstance(x, str) and is_timestamp(x) for x in scalars):
        return
    for x in scalars:
        if isinstance(x, str) and not is_timestamp(x) and _username_candidate(x):
            out.append(PiiMatch(x, Category.USERNAME, source, Rule.LIST_WITH_TIMESTAMP))


def extract_freetext_usernames(text: str, source: str) -> list[PiiMatch]:
    """Usernames referenced inside message text rather than structure.

    Two forms: "@someone" mentions and the activity phrase
    "Shared someone's story".
    """
    out = []
    for m in _TAG_RE.finditer(text):
        if not is_deid_code(m.group(1)):
            out.append(PiiMatch(m.group(1), Category.USERNAME, source, Rule.FREETEXT_TAG))
    for m in _SHARE_RE.finditer(text):
        if not is_deid_code(m.group(1)):
            out.append(PiiMatch(m.group(1), Category.USERNAME, source, Rule.FREETEXT_SHARE))
    return out


@dataclass(frozen=True)
class NameList:
    """First names to look for in free text, held lowercase.

    With cap_sensitive set, only occurrences whose first letter is
    uppercase count as names; this trades recall on sloppy typing for
    precision on everyday words that double as names.
    """

    names: frozenset[str] = field(default_factory=frozenset)
    cap_sensitive: bool = True


# Everyday words that drown the signal when treated as names.
PRUNED_NAMES = frozenset({"van", "door", "can"})


def load_name_list(
    lines: Iterable[str] | Path | None = None, cap_sensitive: bool = True
) -> NameList:
    if lines is None:
        lines = default_name_list_lines()
    elif isinstance(lines, (str, Path)):
        from .config import read_list_file

        lines = read_list_file(Path(lines))
    names = {line.lower() for line in lines} - PRUNED_NAMES
    return NameList(names=frozenset(names), cap_sensitive=cap_sensitive)


def scan_names(text: str, names: NameList, source: str) -> list[PiiMatch]:
    """Find name-list words in free text, one match per distinct spelling."""
    seen: dict[str, PiiMatch] = {}
    for m in _WORD_RE.finditer(text):
        token = m.group(0)
        if token in seen:
            continue
        if names.cap_sensitive and not token[0].isupper():
            continue
        if token.lower() in names.names:
            seen[token] = PiiMatch(token, Category.NAME, source, Rule.NAME_LIST)
    return list(seen.values())


_PROFILE_LABELS: dict[str, tuple[str, ...]] = {
    "username": ("username",),
    "name": ("name", "full_name"),
    "email": ("email", "email_address"),
    "phone": ("phone", "phone_number"),
    "website": ("website",),
}


def extract_profile(profile_doc: Any, ddp_id: str, source: str = "profile.json") -> list[PiiMatch]:
    """Owner data from the profile document.

    The username is the package identifier and is categorised as DdpId.
    The display name is tied to the username so both later receive the
    same replacement code.  Missing labels are logged, not fatal.
    """
    found: dict[str, str] = {}
    _first_scalar_hits(profile_doc, found)

    out: list[PiiMatch] = []
    username = found.get("username")
    if username is not None and _username_candidate(username):
        out.append(PiiMatch(username, Category.DDP_ID, source, Rule.PROFILE))
    else:
        username = None
        log.warning("%s: profile for %s has no usable username", source, ddp_id)

    display = found.get("name")
    if display:
        out.append(
            PiiMatch(display, Category.NAME, source, Rule.PROFILE, alias_of=username)
        )
    for slot, category in (("email", Category.EMAIL), ("phone", Category.PHONE), ("website", Category.URL)):
        value = found.get(slot)
        if value:
            out.append(PiiMatch(value, category, source, Rule.PROFILE))
        else:
            log.info("%s: profile for %s lacks %s", source, ddp_id, slot)
    return out


def _first_scalar_hits(node: Any, found: dict[str, str]) -> None:
    if isinstance(node, dict):
        for label, value in node.items():
            for slot, aliases in _PROFILE_LABELS.items():
                if slot not in found and label in aliases:
                    if isinstance(value, str) and value and not is_deid_code(value):
                        found[slot] = value
            if isinstance(value, (dict, list)):
                _first_scalar_hits(value, found)
    elif isinstance(node, list):
        for item in node:
            _first_scalar_hits(item, found)
