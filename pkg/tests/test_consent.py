"""Consent-cookie decoding and consent-set construction."""

from urllib.parse import quote

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consentaudit.consent import (
    build_consent_sets,
    decode_cookiebot,
    decode_onetrust,
    expected_after_reject_all,
    resolve_consent_state,
)
from consentaudit.errors import DecodeError, UnknownCategory
from consentaudit.matching import DeclarationMap
from consentaudit.model import CategoryDeclaration, Choice

CONSENT = Choice.CONSENT
NOT_CONSENT = Choice.NOT_CONSENT


def serialize_onetrust(choices: dict[str, Choice], url_encode=False) -> str:
    """Test-only encoder mirroring the OptanonConsent groups layout."""
    groups = ",".join(
        f"{cid}:{1 if choice is CONSENT else 0}" for cid, choice in choices.items()
    )
    if url_encode:
        return "groups=" + quote(groups, safe="")
    return f"groups={groups}"


_ID = st.text(alphabet="ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789", min_size=1, max_size=6)


class TestDecodeOneTrust:
    def test_documented_example(self):
        assert decode_onetrust("groups=C1:1,C2:0") == {
            "C1": CONSENT,
            "C2": NOT_CONSENT,
        }

    def test_empty_groups_is_decode_error(self):
        with pytest.raises(DecodeError):
            decode_onetrust("groups=")

    def test_url_encoded_payload(self):
        # manual decode: %3A -> ':', %2C -> ',' so C0001:1,C0004:0
        assert decode_onetrust("groups=C0001%3A1%2CC0004%3A0") == {
            "C0001": CONSENT,
            "C0004": NOT_CONSENT,
        }

    def test_missing_groups_field(self):
        with pytest.raises(DecodeError, match="groups"):
            decode_onetrust("consentId=abc&landingPath=https%3A%2F%2Fx")

    def test_unknown_flag_rejected(self):
        with pytest.raises(DecodeError, match="C2"):
            decode_onetrust("groups=C1:1,C2:2")

    def test_malformed_pair_rejected(self):
        with pytest.raises(DecodeError):
            decode_onetrust("groups=C1")

    def test_other_fields_parsed_leniently(self):
        raw = "consentId=xyz&datestamp=now&groups=C1:1&AwaitingReconsent=false"
        assert decode_onetrust(raw) == {"C1": CONSENT}

    def test_absent_categories_default_by_rejectable_flag(self):
        categories = (
            CategoryDeclaration("C1", "Necessary", False, CONSENT),
            CategoryDeclaration("C9", "Extra", True, NOT_CONSENT),
        )
        choices = decode_onetrust("groups=C1:1", categories)
        assert choices["C9"] is NOT_CONSENT

    @settings(max_examples=200, deadline=None)
    @given(
        pairs=st.dictionaries(_ID, st.sampled_from([CONSENT, NOT_CONSENT]), min_size=1, max_size=8),
        encode=st.booleans(),
    )
    def test_round_trip(self, pairs, encode):
        assert decode_onetrust(serialize_onetrust(pairs, encode)) == pairs


COOKIEBOT_TEMPLATE = (
    "{{stamp:'abc',necessary:true,preferences:{preferences},"
    "statistics:{statistics},marketing:{marketing},method:'explicit'}}"
)


class TestDecodeCookiebot:
    def test_reject_all_payload(self):
        raw = COOKIEBOT_TEMPLATE.format(
            preferences="false", statistics="false", marketing="false"
        )
        assert decode_cookiebot(raw) == {
            "necessary": CONSENT,
            "preferences": NOT_CONSENT,
            "statistics": NOT_CONSENT,
            "marketing": NOT_CONSENT,
            "unclassified": CONSENT,
        }

    def test_accept_all_payload(self):
        raw = COOKIEBOT_TEMPLATE.format(
            preferences="true", statistics="true", marketing="true"
        )
        assert all(c is CONSENT for c in decode_cookiebot(raw).values())

    def test_missing_marketing_field_named(self):
        raw = "{necessary:true,preferences:false,statistics:false}"
        with pytest.raises(DecodeError, match="marketing"):
            decode_cookiebot(raw)

    def test_url_encoded_payload(self):
        raw = quote(
            COOKIEBOT_TEMPLATE.format(
                preferences="false", statistics="true", marketing="false"
            ),
            safe="",
        )
        choices = decode_cookiebot(raw)
        assert choices["statistics"] is CONSENT
        assert choices["marketing"] is NOT_CONSENT

    @settings(max_examples=200, deadline=None)
    @given(
        preferences=st.booleans(),
        statistics=st.booleans(),
        marketing=st.booleans(),
    )
    def test_necessary_and_unclassified_never_denied(
        self, preferences, statistics, marketing
    ):
        raw = COOKIEBOT_TEMPLATE.format(
            preferences=str(preferences).lower(),
            statistics=str(statistics).lower(),
            marketing=str(marketing).lower(),
        )
        choices = decode_cookiebot(raw)
        assert choices["necessary"] is CONSENT
        assert choices["unclassified"] is CONSENT


class TestBuildConsentSets:
    def _map(self, memberships):
        return DeclarationMap(
            {k: frozenset(v) for k, v in memberships.items()}
        )

    def test_single_rejected_membership(self):
        sets = build_consent_sets(
            {"analytics": NOT_CONSENT},
            self._map({("_ga", "a.com"): {"analytics"}}),
        )
        assert ("_ga", "a.com") in sets.rejected
        assert ("_ga", "a.com") not in sets.approved

    def test_gid_in_both_necessary_and_performance(self):
        sets = build_consent_sets(
            {"necessary": CONSENT, "performance": NOT_CONSENT},
            self._map({("_gid", "cambridge.org"): {"necessary", "performance"}}),
        )
        assert ("_gid", "cambridge.org") in sets.approved
        assert ("_gid", "cambridge.org") in sets.rejected

    def test_unmatched_cookie_in_neither(self):
        sets = build_consent_sets({}, self._map({("x", "a.com"): set()}))
        assert not sets.approved and not sets.rejected

    def test_unknown_category_raises(self):
        with pytest.raises(UnknownCategory):
            build_consent_sets({}, self._map({("x", "a.com"): {"ghost"}}))

    @settings(max_examples=100, deadline=None)
    @given(
        choices=st.dictionaries(
            st.sampled_from(["c1", "c2", "c3"]),
            st.sampled_from([CONSENT, NOT_CONSENT]),
            min_size=3,
            max_size=3,
        ),
        memberships=st.dictionaries(
            st.tuples(st.sampled_from(["a", "b", "c"]), st.just("x.com")),
            st.sets(st.sampled_from(["c1", "c2", "c3"]), max_size=3),
            max_size=3,
        ),
    )
    def test_equals_set_builder_definitions(self, choices, memberships):
        sets = build_consent_sets(choices, self._map(memberships))
        # brute force over the definition: key approved iff any consented
        # category contains it, rejected iff any rejected category does
        for key, cats in memberships.items():
            assert (key in sets.approved) == any(
                choices[c] is CONSENT for c in cats
            )
            assert (key in sets.rejected) == any(
                choices[c] is NOT_CONSENT for c in cats
            )


class TestResolveConsentState:
    def _categories(self):
        return (
            CategoryDeclaration("C0001", "Necessary", False, CONSENT),
            CategoryDeclaration("C0002", "Performance", True, NOT_CONSENT),
        )

    def _snapshot(self, raw, cmp="onetrust"):
        from consentaudit.model import Cmp, ConsentStateSnapshot

        return ConsentStateSnapshot(
            cmp=Cmp(cmp),
            raw_value=raw,
            consent_cookie_domain="a.com",
            captured_at=1,
            page_url="https://a.com/",
        )

    def test_reject_all_recorded(self):
        state = resolve_consent_state(
            (self._snapshot("groups=C0001:1,C0002:0"),), self._categories(), True
        )
        assert state.recorded and not state.declarations_absent

    def test_still_consented_category_flags_not_recorded(self):
        state = resolve_consent_state(
            (self._snapshot("groups=C0001:1,C0002:1"),), self._categories(), True
        )
        assert not state.recorded
        assert any("C0002" in d for d in state.diagnostics)

    def test_missing_snapshot_with_declarations(self):
        state = resolve_consent_state((), self._categories(), True)
        assert not state.recorded

    def test_unknown_cmp_downgrades_to_declarations_absent(self):
        state = resolve_consent_state((self._snapshot("", "other"),), (), False)
        assert state.declarations_absent and state.recorded

    def test_expected_after_reject_all(self):
        expected = expected_after_reject_all(self._categories())
        assert expected == {"C0001": CONSENT, "C0002": NOT_CONSENT}
