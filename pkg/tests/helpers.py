"""Shared builders for in-memory traces used across test modules."""

from __future__ import annotations

from consentaudit.traceio import parse_trace, write_records


def meta(site="example.com", region="EU", iteration=1):
    return {
        "kind": "meta",
        "trace_version": 1,
        "site": site,
        "region": region,
        "iteration": iteration,
    }


def category(category_id, rejectable, choice=None, label=None):
    return {
        "kind": "category",
        "category_id": category_id,
        "label": label or category_id,
        "rejectable": rejectable,
        "consent_choice": choice or ("not_consent" if rejectable else "consent"),
    }


def declaration(name_pattern, host, category_id, purpose_text=""):
    return {
        "kind": "declaration",
        "name_pattern": name_pattern,
        "host": host,
        "category_id": category_id,
        "purpose_text": purpose_text,
        "declared_duration": "",
    }


def request(request_id, url, initiator_frame=None):
    return {
        "kind": "request",
        "request_id": request_id,
        "url": url,
        "method": "GET",
        "initiator_frame": url if initiator_frame is None else initiator_frame,
    }


def cookie(request_id, name, domain, value="v", path="/", phase="post_reject", at=1000):
    return {
        "kind": "cookie",
        "request_id": request_id,
        "name": name,
        "domain": domain,
        "path": path,
        "value": value,
        "observed_at": at,
        "phase": phase,
    }


def onetrust_snapshot(groups, domain="example.com"):
    return {
        "kind": "snapshot",
        "cmp": "onetrust",
        "raw_value": f"groups={groups}",
        "consent_cookie_domain": domain,
        "captured_at": 5000,
        "page_url": f"https://{domain}/",
    }


def build_trace(records):
    return parse_trace(write_records(records))


def simple_onetrust_records(site="example.com", region="EU", iteration=1):
    """One necessary + one rejectable category, reject-all recorded."""
    return [
        meta(site, region, iteration),
        category("C0001", False),
        category("C0002", True),
        onetrust_snapshot("C0001:1,C0002:0", site),
    ]
