import re

import pytest

from ddpdeid.errors import FatalInputError, InvariantError, KeyCollisionError
from ddpdeid.extract import Category, PiiMatch, Rule
from ddpdeid.keymap import (
    FIXED_CODES,
    Participant,
    PiiKeyMap,
    build_keymap,
    canonical_value,
    load_keys,
    load_participant_file,
    save_keys,
)

CODE_FORM = re.compile(r"__[0-9a-f]{16}")

SALT = bytes.fromhex("00112233445566778899aabbccddeeff")


def um(value, rule=Rule.LABEL_VALUE, category=Category.USERNAME, alias_of=None):
    return PiiMatch(value, category, "t", rule, alias_of=alias_of)


class TestCodes:
    def test_code_form(self):
        code = PiiKeyMap(salt=SALT).assign_code(um("jdoe_99"))
        assert CODE_FORM.fullmatch(code)

    def test_same_salt_same_code(self):
        a = PiiKeyMap(salt=SALT).assign_code(um("jdoe_99"))
        b = PiiKeyMap(salt=SALT).assign_code(um("jdoe_99"))
        assert a == b

    def test_different_salt_different_code(self):
        a = PiiKeyMap(salt=SALT).assign_code(um("jdoe_99"))
        b = PiiKeyMap(salt=b"\x01" * 16).assign_code(um("jdoe_99"))
        assert a != b

    def test_fresh_salt_when_none_given(self):
        assert PiiKeyMap().salt != PiiKeyMap().salt

    def test_case_insensitive_single_entry(self):
        km = PiiKeyMap(salt=SALT)
        a = km.assign_code(um("JDoe_99"))
        b = km.assign_code(um("jdoe_99"))
        assert a == b
        assert len(km) == 1
        assert canonical_value(Category.USERNAME, "JDoe_99") == "jdoe_99"

    def test_usernames_and_names_use_separate_namespaces(self):
        km = PiiKeyMap(salt=SALT)
        a = km.assign_code(um("fenna"))
        b = km.assign_code(um("fenna", rule=Rule.NAME_LIST, category=Category.NAME))
        assert a != b
        assert len(km) == 2

    def test_fixed_codes(self):
        km = PiiKeyMap(salt=SALT)
        assert km.assign_code(um("a@b.nl", category=Category.EMAIL)) == "__emailaddress"
        assert km.assign_code(um("0612345678", category=Category.PHONE)) == "__phonenumber"
        assert km.assign_code(um("instagram.com/x", category=Category.URL)) == "__url"
        assert set(FIXED_CODES.values()) == {"__emailaddress", "__phonenumber", "__url"}

    def test_no_collisions_over_many_values(self):
        km = PiiKeyMap(salt=SALT)
        codes = {km.assign_code(um(f"user_{i:05d}")) for i in range(2000)}
        assert len(codes) == 2000


class TestDdpIdUpgrade:
    def test_username_then_ddp_id_keeps_code(self):
        km = PiiKeyMap(salt=SALT)
        first = km.assign_code(um("jdoe_99"))
        second = km.assign_code(um("jdoe_99", category=Category.DDP_ID, rule=Rule.PROFILE))
        assert first == second
        assert [c for c, _, _ in km.items()] == [Category.DDP_ID]

    def test_ddp_id_never_downgraded(self):
        km = PiiKeyMap(salt=SALT)
        km.assign_code(um("jdoe_99", category=Category.DDP_ID, rule=Rule.PROFILE))
        km.assign_code(um("jdoe_99"))
        assert [c for c, _, _ in km.items()] == [Category.DDP_ID]

    def test_lookup_crosses_the_two_categories(self):
        km = PiiKeyMap(salt=SALT)
        code = km.assign_code(um("jdoe_99", category=Category.DDP_ID, rule=Rule.PROFILE))
        assert km.lookup(Category.USERNAME, "JDOE_99") == code
        assert km.lookup(Category.DDP_ID, "jdoe_99") == code
        assert km.lookup(Category.NAME, "jdoe_99") is None
        assert km.lookup(Category.USERNAME, "someone_else") is None


class TestParticipants:
    participants = [
        Participant("jdoe_99", "Jane Doe", "PP01"),
        Participant("other_ac", "", "PP02"),
    ]

    def test_participant_username_gets_id(self):
        km = PiiKeyMap(salt=SALT, participants=self.participants)
        assert km.assign_code(um("JDoe_99")) == "PP01"

    def test_participant_name_gets_id_and_is_exact(self):
        km = PiiKeyMap(salt=SALT, participants=self.participants)
        got = km.assign_code(um("jane doe", rule=Rule.NAME_LIST, category=Category.NAME))
        assert got == "PP01"
        assert "jane doe" in km.exact_names

    def test_build_keymap_seeds_participants(self):
        km = build_keymap([], participants=self.participants, salt=SALT)
        assert km.lookup(Category.USERNAME, "jdoe_99") == "PP01"
        assert km.lookup(Category.NAME, "Jane Doe") == "PP01"
        assert km.lookup(Category.USERNAME, "other_ac") == "PP02"
        assert km.lookup(Category.NAME, "") is None

    def test_participant_ids_never_rehashed(self):
        km = build_keymap(
            [um("PP01"), um("stranger_9")], participants=self.participants, salt=SALT
        )
        assert km.lookup(Category.USERNAME, "PP01") is None
        assert CODE_FORM.fullmatch(km.lookup(Category.USERNAME, "stranger_9"))

    def test_is_participant_id_case_insensitive(self):
        km = PiiKeyMap(salt=SALT, participants=self.participants)
        assert km.is_participant_id("pp01")
        assert not km.is_participant_id("PP99")


class TestProfileNameAlias:
    def test_display_name_shares_username_code(self):
        km = PiiKeyMap(salt=SALT)
        user_code = km.assign_code(um("jdoe_99", category=Category.DDP_ID, rule=Rule.PROFILE))
        name_code = km.assign_code(
            um("Jane Doe", rule=Rule.PROFILE, category=Category.NAME, alias_of="jdoe_99")
        )
        assert name_code == user_code
        assert "jane doe" in km.exact_names

    def test_alias_resolves_to_participant_id(self):
        km = PiiKeyMap(salt=SALT, participants=[Participant("jdoe_99", "", "PP07")])
        name_code = km.assign_code(
            um("Jane Doe", rule=Rule.PROFILE, category=Category.NAME, alias_of="JDoe_99")
        )
        assert name_code == "PP07"

    def test_unaliased_profile_name_hashes_alone(self):
        km = PiiKeyMap(salt=SALT)
        user_code = km.assign_code(um("jdoe_99"))
        name_code = km.assign_code(um("Jane Doe", rule=Rule.PROFILE, category=Category.NAME))
        assert name_code != user_code
        assert "jane doe" in km.exact_names


class TestCollisions:
    def test_collision_raises(self, monkeypatch):
        km = PiiKeyMap(salt=SALT)
        monkeypatch.setattr(PiiKeyMap, "_hash", lambda self, c, v: "__" + "0" * 16)
        km.assign_code(um("first_user"))
        with pytest.raises(KeyCollisionError, match="different salt"):
            km.assign_code(um("second_user"))

    def test_repeat_of_same_value_is_not_a_collision(self, monkeypatch):
        km = PiiKeyMap(salt=SALT)
        monkeypatch.setattr(PiiKeyMap, "_hash", lambda self, c, v: "__" + "0" * 16)
        assert km.assign_code(um("first_user")) == km.assign_code(um("FIRST_user"))

    def test_collision_is_an_invariant_error(self):
        assert issubclass(KeyCollisionError, InvariantError)


class TestKeyFileIO:
    def make_map(self):
        km = PiiKeyMap(salt=SALT)
        km.assign_code(um("jdoe_99", category=Category.DDP_ID, rule=Rule.PROFILE))
        km.assign_code(um("friend_1"))
        km.assign_code(um("Fenna", rule=Rule.NAME_LIST, category=Category.NAME))
        km.assign_code(um("a@b.nl", category=Category.EMAIL))
        return km

    def test_round_trip(self, tmp_path):
        km = self.make_map()
        path = tmp_path / "keys.tsv"
        save_keys(km, path)
        assert load_keys(path) == km

    def test_salt_round_trip(self, tmp_path):
        path = tmp_path / "keys.tsv"
        save_keys(self.make_map(), path, include_salt=True)
        text = path.read_text()
        assert text.startswith(f"# salt={SALT.hex()}\n")
        assert load_keys(path).salt == SALT

    def test_rows_sorted_and_tab_separated(self, tmp_path):
        path = tmp_path / "keys.tsv"
        save_keys(self.make_map(), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "category\toriginal\tcode"
        body = [line.split("\t") for line in lines[1:]]
        assert all(len(row) == 3 for row in body)
        assert body == sorted(body)
        assert ["email", "a@b.nl", "__emailaddress"] in body

    def test_tab_in_value_refused(self, tmp_path):
        km = PiiKeyMap(salt=SALT)
        km.assign_code(um("evil\tname", rule=Rule.NAME_LIST, category=Category.NAME))
        with pytest.raises(InvariantError):
            save_keys(km, tmp_path / "keys.tsv")

    def test_load_rejects_missing_header(self, tmp_path):
        path = tmp_path / "keys.tsv"
        path.write_text("username\tjdoe_99\t__0000000000000000\n")
        with pytest.raises(FatalInputError, match="header"):
            load_keys(path)

    def test_load_rejects_duplicates(self, tmp_path):
        path = tmp_path / "keys.tsv"
        path.write_text(
            "category\toriginal\tcode\n"
            "username\tjdoe_99\t__0000000000000000\n"
            "username\tjdoe_99\t__1111111111111111\n"
        )
        with pytest.raises(FatalInputError, match="duplicate"):
            load_keys(path)

    def test_load_rejects_unknown_category(self, tmp_path):
        path = tmp_path / "keys.tsv"
        path.write_text("category\toriginal\tcode\nwhat\tx\t__0000000000000000\n")
        with pytest.raises(FatalInputError, match="unknown category"):
            load_keys(path)

    def test_load_rejects_bad_salt(self, tmp_path):
        path = tmp_path / "keys.tsv"
        path.write_text("# salt=zz\ncategory\toriginal\tcode\n")
        with pytest.raises(FatalInputError, match="salt"):
            load_keys(path)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(FatalInputError):
            load_keys(tmp_path / "absent.tsv")


class TestParticipantFile:
    def write(self, tmp_path, text):
        path = tmp_path / "participants.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_loads_rows(self, tmp_path):
        path = self.write(
            tmp_path,
            "username,name,participant_id\njdoe_99,Jane Doe,PP01\nother_ac,,PP02\n\n",
        )
        got = load_participant_file(path)
        assert got == [
            Participant("jdoe_99", "Jane Doe", "PP01"),
            Participant("other_ac", "", "PP02"),
        ]

    def test_header_required(self, tmp_path):
        path = self.write(tmp_path, "jdoe_99,Jane Doe,PP01\n")
        with pytest.raises(FatalInputError, match="header"):
            load_participant_file(path)

    def test_column_count_checked(self, tmp_path):
        path = self.write(tmp_path, "username,name,participant_id\njdoe_99,PP01\n")
        with pytest.raises(FatalInputError, match="3 columns"):
            load_participant_file(path)

    def test_username_shape_checked(self, tmp_path):
        path = self.write(tmp_path, "username,name,participant_id\nbad name,Jane,PP01\n")
        with pytest.raises(FatalInputError, match="invalid username"):
            load_participant_file(path)

    def test_empty_id_refused(self, tmp_path):
        path = self.write(tmp_path, "username,name,participant_id\njdoe_99,Jane,\n")
        with pytest.raises(FatalInputError, match="empty participant id"):
            load_participant_file(path)

    def test_conflicting_ids_refused(self, tmp_path):
        path = self.write(
            tmp_path,
            "username,name,participant_id\njdoe_99,Jane,PP01\nJDOE_99,Jane,PP02\n",
        )
        with pytest.raises(FatalInputError, match="two ids"):
            load_participant_file(path)

    def test_repeated_identical_row_allowed(self, tmp_path):
        path = self.write(
            tmp_path,
            "username,name,participant_id\njdoe_99,Jane,PP01\njdoe_99,Jane,PP01\n",
        )
        assert len(load_participant_file(path)) == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(FatalInputError):
            load_participant_file(tmp_path / "absent.csv")
