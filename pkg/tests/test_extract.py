"""Extraction rules, checked against a brute-force oracle.

The oracle enumerates every dict pair and every list with an explicit
stack and applies the rule definitions directly; the implementation
must find exactly the same (value, rule) set on any document.
"""

import json
import random

import pytest

from ddpdeid.extract import (
    Category,
    NameList,
    Rule,
    extract_freetext_usernames,
    extract_profile,
    extract_structured,
    is_deid_code,
    is_timestamp,
    is_username_like,
    load_name_list,
    scan_names,
)

SENDERS = {"sender", "username", "user", "author", "participants", "owner"}
EXEMPT = {"media_url", "taken_at", "caption", "type", "device_id"}

TS = "2020-10-21T14:03:11+00:00"


def oracle_structured(doc, senders=SENDERS, exempt=EXEMPT):
    """Stack-based re-statement of the three structural rules."""

    def candidate(v):
        return (
            isinstance(v, str)
            and is_username_like(v)
            and not is_deid_code(v)
            and not is_timestamp(v)
        )

    found = set()
    stack = [doc]
    while stack:
        node = stack.pop()
        if isinstance(node, dict):
            for label, value in node.items():
                if label not in exempt:
                    values = value if isinstance(value, list) else [value]
                    if label in senders:
                        for item in values:
                            if candidate(item):
                                found.add((item, Rule.LABEL_VALUE))
                    if (
                        isinstance(label, str)
                        and is_username_like(label)
                        and not is_deid_code(label)
                        and isinstance(value, str)
                        and is_timestamp(value)
                    ):
                        found.add((label, Rule.LABELLED_TIMESTAMP))
                if isinstance(value, dict):
                    stack.append(value)
                elif isinstance(value, list):
                    if label in exempt:
                        stack.extend(x for x in value if isinstance(x, (dict, list)))
                    else:
                        stack.append(value)
        elif isinstance(node, list):
            scalars = [x for x in node if not isinstance(x, (dict, list))]
            if any(isinstance(x, str) and is_timestamp(x) for x in scalars):
                for x in scalars:
                    if isinstance(x, str) and not is_timestamp(x) and candidate(x):
                        found.add((x, Rule.LIST_WITH_TIMESTAMP))
            stack.extend(x for x in node if isinstance(x, (dict, list)))
    return found


def run_both(doc):
    got = {(m.value, m.rule) for m in extract_structured(doc, "t", SENDERS, EXEMPT)}
    want = oracle_structured(doc)
    assert got == want
    return got


class TestPredicates:
    @pytest.mark.parametrize(
        "value", ["abc", "a_b", "A.B9", "x" * 30, "jdoe_99", "20.01.2001"]
    )
    def test_username_form_accepts(self, value):
        assert is_username_like(value)

    @pytest.mark.parametrize(
        "value", ["ab", "x" * 31, "a b", "a-b", "", "héllo", "a@b", 42]
    )
    def test_username_form_rejects(self, value):
        assert not is_username_like(value)

    @pytest.mark.parametrize(
        "value",
        [
            "2020-10-21T14:03:11",
            "2020-10-21 14:03:11",
            "2020-01-01T00:00",
            "2020-10-21T14:03:11.123Z",
            "2020-10-21T14:03:11+02:00",
            "2020-10-21T14:03:11-0230",
            "2020-10-21T14:03:11.123456789Z",
        ],
    )
    def test_timestamps_accept(self, value):
        assert is_timestamp(value)

    @pytest.mark.parametrize(
        "value",
        [
            "2020-13-01T10:00:00",  # month 13
            "2020-02-30T10:00:00",  # February 30th
            "2020-10-21",  # date only
            "14:03:11",
            "not a date",
            "2020-10-21X10:00:00",
            "2020-10-21T24:00:00",
            "",
            1603270991,
        ],
    )
    def test_timestamps_reject(self, value):
        assert not is_timestamp(value)

    def test_codes_recognised(self):
        assert is_deid_code("__0123456789abcdef")
        assert is_deid_code("__emailaddress")
        assert is_deid_code("__phonenumber")
        assert is_deid_code("__url")
        assert not is_deid_code("__0123456789ABCDEF")  # ours are lowercase
        assert not is_deid_code("__short")
        assert not is_deid_code("jdoe_99")


class TestStructuredRules:
    def test_sender_label(self):
        assert run_both({"sender": "jdoe_99"}) == {("jdoe_99", Rule.LABEL_VALUE)}

    def test_sender_label_list_value(self):
        got = run_both({"participants": ["a_bc", "d.ef", "x", 7]})
        assert got == {("a_bc", Rule.LABEL_VALUE), ("d.ef", Rule.LABEL_VALUE)}

    def test_labelled_timestamp(self):
        assert run_both({"jdoe_99": TS}) == {("jdoe_99", Rule.LABELLED_TIMESTAMP)}

    def test_exempt_label_suppresses_value(self):
        assert run_both({"taken_at": TS}) == set()
        assert run_both({"media_url": "jdoe_99", "sender": "ok_one"}) == {
            ("ok_one", Rule.LABEL_VALUE)
        }

    def test_exempt_label_still_walks_children(self):
        doc = {"media_url": {"sender": "deep_one"}}
        assert run_both(doc) == {("deep_one", Rule.LABEL_VALUE)}

    def test_exempt_list_not_scanned_but_children_walked(self):
        doc = {"caption": [TS, "would_match", {"sender": "inner_one"}]}
        assert run_both(doc) == {("inner_one", Rule.LABEL_VALUE)}

    def test_list_with_timestamp(self):
        assert run_both([TS, "jdoe_99", 5, "hello world"]) == {
            ("jdoe_99", Rule.LIST_WITH_TIMESTAMP)
        }

    def test_list_without_timestamp(self):
        assert run_both(["jdoe_99", "other_user"]) == set()

    def test_nested_pair_lists(self):
        doc = {"media_likes": [[TS, "fan_one"], [TS, "fan_two"]]}
        assert run_both(doc) == {
            ("fan_one", Rule.LIST_WITH_TIMESTAMP),
            ("fan_two", Rule.LIST_WITH_TIMESTAMP),
        }

    def test_codes_and_timestamps_never_extracted(self):
        doc = {
            "sender": "__0123456789abcdef",
            "owner": "__emailaddress",
            "participants": [TS],
        }
        assert run_both(doc) == set()

    def test_timestamp_like_label_with_timestamp_value_matches(self):
        # This is the known over-reach of the labelled-timestamp rule:
        # metadata labels conform to the username shape.
        assert run_both({"created_at": TS}) == {("created_at", Rule.LABELLED_TIMESTAMP)}

    def test_fuzz_against_oracle(self):
        rng = random.Random(2026)
        labels = ["sender", "taken_at", "note", "jdoe_99", "media_url", "list", "x_y"]
        scalars = [TS, "user_one", "no spaces here", 7, None, True, "ab", "__url"]

        def build(depth):
            if depth == 0:
                return rng.choice(scalars)
            roll = rng.random()
            if roll < 0.45:
                return {
                    rng.choice(labels): build(depth - 1)
                    for _ in range(rng.randrange(1, 4))
                }
            if roll < 0.8:
                return [build(depth - 1) for _ in range(rng.randrange(0, 4))]
            return rng.choice(scalars)

        for _ in range(300):
            doc = build(rng.randrange(1, 5))
            run_both(doc)


class TestFreeText:
    def test_mentions(self):
        matches = extract_freetext_usernames("zeg @jdoe_99 kijk dit", "t")
        assert [(m.value, m.rule) for m in matches] == [("jdoe_99", Rule.FREETEXT_TAG)]
        assert matches[0].category is Category.USERNAME

    def test_mention_not_inside_email(self):
        assert extract_freetext_usernames("mail naar jane@doe.com", "t") == []

    def test_mention_requires_conforming_name(self):
        assert extract_freetext_usernames("kijk @ab dit", "t") == []
        assert extract_freetext_usernames("geen @ hier", "t") == []

    def test_share_phrase(self):
        for apostrophe in ("'", "’"):
            matches = extract_freetext_usernames(
                f"Shared jdoe_99{apostrophe}s story", "t"
            )
            assert [m.value for m in matches] == ["jdoe_99"]
            assert matches[0].rule is Rule.FREETEXT_SHARE

    def test_codes_skipped(self):
        assert extract_freetext_usernames("zie @__0123456789abcdef nu", "t") == []


class TestNameScan:
    names = NameList(names=frozenset({"ben", "fenna"}), cap_sensitive=True)

    def test_capitalised_only_when_sensitive(self):
        got = scan_names("Ben komt ook, ik ben thuis", self.names, "t")
        assert {m.value for m in got} == {"Ben"}

    def test_insensitive_finds_lowercase(self):
        loose = NameList(names=self.names.names, cap_sensitive=False)
        got = scan_names("ik ben thuis", loose, "t")
        assert {m.value for m in got} == {"ben"}

    def test_one_match_per_spelling(self):
        got = scan_names("Ben, Ben, BEN en Ben", self.names, "t")
        assert sorted(m.value for m in got) == ["BEN", "Ben"]

    def test_word_boundaries_use_word_characters(self):
        # Periods glue to the word, so a sentence-final name is missed;
        # the rewriter uses the same boundary so the two stay consistent.
        assert scan_names("dat zei Ben.", self.names, "t") == []
        got = scan_names("dat zei Ben !", self.names, "t")
        assert {m.value for m in got} == {"Ben"}

    def test_pruned_words_never_load(self):
        nl = load_name_list(["Van", "Door", "Can", "Fenna"], cap_sensitive=True)
        assert nl.names == frozenset({"fenna"})

    def test_bundled_list_excludes_pruned(self):
        nl = load_name_list()
        assert not nl.names & {"van", "door", "can"}
        assert "ben" in nl.names


class TestProfile:
    doc = {
        "username": "jdoe_99",
        "name": "Jane Doe",
        "email": "jane@doe.example",
        "phone_number": "+31 6 1234 5678",
        "website": "https://www.instagram.com/jdoe_99",
    }

    def test_full_profile(self):
        matches = extract_profile(self.doc, "jdoe_99_20201021", "t")
        by_cat = {m.category: m for m in matches}
        assert by_cat[Category.DDP_ID].value == "jdoe_99"
        assert by_cat[Category.NAME].value == "Jane Doe"
        assert by_cat[Category.NAME].alias_of == "jdoe_99"
        assert by_cat[Category.EMAIL].value == "jane@doe.example"
        assert by_cat[Category.PHONE].value == "+31 6 1234 5678"
        assert by_cat[Category.URL].value == "https://www.instagram.com/jdoe_99"
        assert all(m.rule is Rule.PROFILE for m in matches)

    def test_nested_profile_found(self):
        nested = {"account": [{"string_map_data": dict(self.doc)}]}
        matches = extract_profile(nested, "x", "t")
        assert {m.category for m in matches} == {
            Category.DDP_ID,
            Category.NAME,
            Category.EMAIL,
            Category.PHONE,
            Category.URL,
        }

    def test_partial_profile_logs_not_raises(self, caplog):
        with caplog.at_level("INFO", logger="ddpdeid.extract"):
            matches = extract_profile({"username": "jdoe_99"}, "x", "t")
        assert [m.category for m in matches] == [Category.DDP_ID]
        assert any("lacks" in r.message for r in caplog.records)

    def test_unusable_username_leaves_name_unaliased(self, caplog):
        matches = extract_profile({"username": "has space", "name": "Jane"}, "x", "t")
        assert [m.category for m in matches] == [Category.NAME]
        assert matches[0].alias_of is None
        assert any("no usable username" in r.message for r in caplog.records)

    def test_codes_in_profile_skipped(self):
        doc = {"username": "__0123456789abcdef", "email": "__emailaddress"}
        assert extract_profile(doc, "x", "t") == []


def test_matches_serialise_with_plain_category_names():
    m = extract_structured({"sender": "jdoe_99"}, "t", SENDERS, EXEMPT)[0]
    assert str(m.category) == "username"
    assert json.dumps(str(m.category)) == '"username"'
