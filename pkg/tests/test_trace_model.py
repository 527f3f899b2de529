"""Trace parsing, normalization, serialization round trips, and merging."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consentaudit.errors import (
    EmptyInput,
    InvariantViolation,
    MalformedTrace,
    MixedKeys,
    SchemaViolation,
    UnparsableDomain,
)
from consentaudit.model import Party
from consentaudit.psl import derive_party
from consentaudit.traceio import (
    MergeMode,
    merge_iterations,
    parse_trace,
    serialize_trace,
    write_records,
)

from .helpers import (
    build_trace,
    category,
    cookie,
    declaration,
    meta,
    request,
    simple_onetrust_records,
)


class TestParseTrace:
    def test_minimal_document_one_request_zero_cookies(self):
        trace = build_trace([meta(), request("r1", "https://example.com/")])
        assert trace.site == "example.com"
        assert len(trace.requests) == 1
        assert trace.requests[0].attached_cookies == ()
        assert trace.cookies() == []

    def test_cookie_domain_is_normalized(self):
        trace = build_trace(
            [
                meta(),
                request("r1", "https://example.com/"),
                cookie("r1", "a", ".Example.COM"),
            ]
        )
        assert trace.requests[0].attached_cookies[0].domain == "example.com"

    def test_always_active_category_cannot_be_rejected(self):
        records = [meta(), category("C1", False, choice="not_consent")]
        with pytest.raises(InvariantViolation, match="C1"):
            build_trace(records)

    def test_missing_meta_is_schema_violation(self):
        with pytest.raises(SchemaViolation, match="meta"):
            parse_trace(write_records([request("r1", "https://a.com/")]))

    def test_missing_field_is_named(self):
        bad = [meta(), {"kind": "cookie", "request_id": "r1"}]
        with pytest.raises(SchemaViolation, match="name"):
            parse_trace(write_records(bad))

    def test_syntax_error_reports_byte_offset(self):
        good = write_records([meta()])
        payload = good + b'{"kind": broken\n'
        with pytest.raises(MalformedTrace) as exc_info:
            parse_trace(payload)
        assert exc_info.value.byte_offset == len(good)

    def test_unknown_request_id_rejected(self):
        records = [meta(), cookie("ghost", "a", "example.com")]
        with pytest.raises(SchemaViolation, match="ghost"):
            parse_trace(write_records(records))

    def test_unsupported_version_rejected(self):
        records = [dict(meta(), trace_version=2)]
        with pytest.raises(SchemaViolation, match="trace_version"):
            parse_trace(write_records(records))

    def test_subpage_outside_scope_rejected(self):
        records = [meta(), {"kind": "subpage", "url": "https://other.org/x"}]
        with pytest.raises(InvariantViolation, match="scope"):
            parse_trace(write_records(records))

    def test_declaration_with_unknown_category_rejected(self):
        records = [meta(), declaration("_ga", "example.com", "C9")]
        with pytest.raises(InvariantViolation, match="C9"):
            parse_trace(write_records(records))


class TestRoundTrip:
    def test_parse_serialize_parse_is_identity(self):
        records = simple_onetrust_records() + [
            declaration("_ga", "example.com", "C0002", "stats"),
            request("r1", "https://example.com/"),
            cookie("r1", "_ga", "example.com", value="GA1.2.1.2"),
            cookie("r1", "b", "tracker.net", phase="subpage_visit", at=1200),
            {"kind": "banner", "parameters": {"Consent_Model": " opt-in "}},
            {"kind": "subpage", "url": "https://sub.example.com/page"},
        ]
        first = build_trace(records)
        second = parse_trace(serialize_trace(first))
        assert second == first
        # and serialization itself is stable
        assert serialize_trace(second) == serialize_trace(first)

    @settings(max_examples=50, deadline=None)
    @given(
        names=st.lists(
            st.text(alphabet="abcdef_", min_size=1, max_size=6), min_size=0, max_size=5
        ),
        domains=st.lists(
            st.sampled_from(["example.com", "tracker.net", "cdn.example.com"]),
            min_size=5,
            max_size=5,
        ),
    )
    def test_round_trip_on_generated_cookie_sets(self, names, domains):
        records = simple_onetrust_records() + [request("r1", "https://example.com/")]
        for i, name in enumerate(names):
            records.append(cookie("r1", name, domains[i], value=f"v{i}", at=1000 + i))
        first = build_trace(records)
        assert parse_trace(serialize_trace(first)) == first


class TestDeriveParty:
    def test_subdomain_of_site_is_first_party(self):
        assert derive_party("sub.a.com", "a.com") is Party.FIRST_PARTY

    def test_known_tracker_is_third_party(self):
        assert derive_party("doubleclick.net", "nhl.com") is Party.THIRD_PARTY

    def test_suffix_spoof_is_third_party(self):
        # registered domain of a.com.evil.org is evil.org, not a.com
        assert derive_party("a.com.evil.org", "a.com") is Party.THIRD_PARTY

    def test_invalid_host_raises(self):
        with pytest.raises(UnparsableDomain):
            derive_party("not a host", "a.com")

    @given(st.sampled_from(["a.com", "sub.a.com", "x.co.uk", "tracker.net"]))
    def test_invariant_under_case_and_leading_dot(self, domain):
        baseline = derive_party(domain, "a.com")
        assert derive_party("." + domain.upper(), "a.com") is baseline
        assert derive_party(domain.title(), "a.com") is baseline


def _one_cookie_trace(names, site="example.com", region="EU", iteration=1):
    records = [meta(site, region, iteration), request("r1", f"https://{site}/")]
    for i, name in enumerate(names):
        records.append(cookie("r1", name, site, at=1000 + i))
    return build_trace(records)


class TestMergeIterations:
    def test_identical_cookie_union_is_one(self):
        t1 = _one_cookie_trace(["x"], iteration=1)
        t2 = _one_cookie_trace(["x"], iteration=2)
        merged = merge_iterations([t1, t2], MergeMode.UNION)
        assert merged.union_size == 1
        assert merged.mean_cookie_count == 1.0

    def test_union_two_mean_one_point_five(self):
        t1 = _one_cookie_trace(["x"], iteration=1)
        t2 = _one_cookie_trace(["x", "y"], iteration=2)
        merged = merge_iterations([t1, t2])
        assert merged.union_size == 2
        assert merged.mean_cookie_count == 1.5

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyInput):
            merge_iterations([])

    def test_mixed_keys_rejected(self):
        t1 = _one_cookie_trace(["x"], site="a.com")
        t2 = _one_cookie_trace(["x"], site="b.com")
        with pytest.raises(MixedKeys):
            merge_iterations([t1, t2])

    def test_duplicate_iteration_rejected(self):
        t1 = _one_cookie_trace(["x"], iteration=1)
        t2 = _one_cookie_trace(["y"], iteration=1)
        with pytest.raises(InvariantViolation, match="iteration"):
            merge_iterations([t1, t2])

    @settings(max_examples=40, deadline=None)
    @given(
        sets=st.lists(
            st.sets(st.sampled_from("abcdef"), max_size=4), min_size=1, max_size=4
        )
    )
    def test_union_commutative_associative_idempotent(self, sets):
        traces = [
            _one_cookie_trace(sorted(names), iteration=i + 1)
            for i, names in enumerate(sets)
        ]
        forward = merge_iterations(traces).cookie_instances.keys()
        backward = merge_iterations(list(reversed(traces))).cookie_instances.keys()
        doubled = merge_iterations(traces + []).cookie_instances.keys()
        assert set(forward) == set(backward) == set(doubled)
        assert set(forward) == {
            k for t in traces for k in (c.key for c in t.cookies())
        }
