#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures (trace corpus + labeled pages).

Everything is deterministic: fixed timestamps, fixed seeds, sorted output.
Ground truth in manifest.json comes straight from the site plans below by
counting, never from running the classifier under test.

Usage: python scripts/make_fixtures.py [--out tests/fixtures]
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from consentaudit.traceio import write_records  # noqa: E402

BASE_TS = 1700000000000

ONETRUST_CATEGORIES = [
    ("C0001", "Strictly Necessary", False),
    ("C0002", "Performance", True),
    ("C0003", "Targeting", True),
]
ONETRUST_REJECT_GROUPS = "groups=C0001:1,C0002:0,C0003:0"
COOKIEBOT_CATEGORIES = [
    ("necessary", "Necessary", False),
    ("preferences", "Preferences", True),
    ("statistics", "Statistics", True),
    ("marketing", "Marketing", True),
    ("unclassified", "Unclassified", False),
]
COOKIEBOT_REJECT_VALUE = (
    "%7Bstamp%3A%27fixture%27%2Cnecessary%3Atrue%2Cpreferences%3Afalse"
    "%2Cstatistics%3Afalse%2Cmarketing%3Afalse%2Cmethod%3A%27explicit%27%7D"
)

# One cookie plan: (name, domain, path, value, phases, category_ids, outcome,
#                   party, pi_category). outcome None = not classified
# (pre-consent-only or out-of-scope cookies).
SITE_PLANS = [
    {
        "site": "alpha-news.com",
        "cmp": "onetrust",
        "iterations": {"EU": 2, "US": 1},
        "banner": {
            "EU": {"consent_model": "opt-in", "reject_all_present": "true",
                   "consent_lifetime_days": "365", "banner_position": "bottom"},
            "US": {"consent_model": "opt-out", "reject_all_present": "false",
                   "consent_lifetime_days": "30", "banner_position": "bottom"},
        },
        "declarations": [
            ("sess", "alpha-news.com", "C0001", "Keeps your session while you browse"),
            ("_ga", "alpha-news.com", "C0002", "Google Analytics uid for usage statistics"),
        ],
        "cookies": {
            "EU": [
                ("sess", "alpha-news.com", "/", "k2J8dT", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "unlikely_pi"),
                ("_ga", "alpha-news.com", "/", "GA1.2.1846295732.1700012345",
                 ["post_reject", "subpage_visit"], ["C0002"],
                 "ignored_rejection", "first_party", "tracker"),
                ("tmp", "alpha-news.com", "/", "1", ["pre_consent"], [],
                 None, "first_party", None),
            ],
            "US": [
                ("sess", "alpha-news.com", "/", "k2J8dT", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "unlikely_pi"),
                ("_ga", "alpha-news.com", "/", "GA1.2.1846295732.1700012345",
                 ["post_reject"], ["C0002"],
                 "ignored_rejection", "first_party", "tracker"),
                ("IDE", "doubleclick.net", "/", "AHWqTUk3mBhXCvq9Zx7Fw2Lr8pQa",
                 ["post_reject", "subpage_visit"], [],
                 "undeclared", "third_party", "tracker"),
            ],
        },
        "subpages": ["https://alpha-news.com/world", "https://alpha-news.com/tech"],
    },
    {
        "site": "beta-shop.com",
        "cmp": "onetrust",
        "iterations": {"EU": 1, "US": 1},
        "banner": {
            "EU": {"consent_model": "opt-in", "reject_all_present": "true",
                   "consent_lifetime_days": "365"},
            "US": {"consent_model": "opt-in", "reject_all_present": "true",
                   "consent_lifetime_days": "365"},
        },
        "declarations": [
            ("_gid", "beta-shop.com", "C0001", "Distinguishes users"),
            ("_gid", "beta-shop.com", "C0002", "Counts page views per visitor id"),
            ("wishlist", "beta-shop.com", "C0001", "Remembers wishlist items"),
        ],
        "cookies": {
            "EU": [
                ("_gid", "beta-shop.com", "/", "GA1.2.1093758264.1700054321",
                 ["post_reject"], ["C0001", "C0002"],
                 "wrong_category", "first_party", "tracker"),
                ("cartid", "beta-shop.com", "/", "c81e3fa2b6d94e0f8a17c5b2d9e4f601",
                 ["post_reject"], [], "undeclared", "first_party", "tracker"),
                ("wishlist", "beta-shop.com", "/", "empty", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "unlikely_pi"),
            ],
            "US": [
                ("_gid", "beta-shop.com", "/", "GA1.2.1093758264.1700054321",
                 ["post_reject"], ["C0001", "C0002"],
                 "wrong_category", "first_party", "tracker"),
                ("cartid", "beta-shop.com", "/", "c81e3fa2b6d94e0f8a17c5b2d9e4f601",
                 ["post_reject"], [], "undeclared", "first_party", "tracker"),
                ("wishlist", "beta-shop.com", "/", "empty", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "unlikely_pi"),
            ],
        },
        "subpages": ["https://beta-shop.com/sale"],
    },
    {
        "site": "gamma-media.co.uk",
        "cmp": "cookiebot",
        "iterations": {"EU": 1, "US": 1},
        "banner": {
            "EU": {"consent_model": "opt-in", "reject_all_present": "true",
                   "category_names": "Necessary|Preferences|Statistics|Marketing"},
            "US": {"consent_model": "implied", "reject_all_present": "false",
                   "category_names": "Necessary|Preferences|Statistics|Marketing"},
        },
        "declarations": [
            ("csrftoken", "gamma-media.co.uk", "necessary", "Security token"),
            ("_fbp", "gamma-media.co.uk", "marketing", "Meta pixel browser uid"),
            ("misc", "gamma-media.co.uk", "unclassified", ""),
        ],
        "cookies": {
            "EU": [
                ("csrftoken", "gamma-media.co.uk", "/", "YwQp7n", ["post_reject"],
                 ["necessary"], "compliant", "first_party", "unlikely_pi"),
                ("_fbp", "gamma-media.co.uk", "/", "fb.1.1700000123456.194673528",
                 ["subpage_visit"], ["marketing"],
                 "ignored_rejection", "first_party", "tracker"),
                ("misc", "gamma-media.co.uk", "/", "n7wq", ["post_reject"],
                 ["unclassified"], "compliant", "first_party", "unlikely_pi"),
            ],
            "US": [
                ("csrftoken", "gamma-media.co.uk", "/", "YwQp7n", ["post_reject"],
                 ["necessary"], "compliant", "first_party", "unlikely_pi"),
                ("_fbp", "gamma-media.co.uk", "/", "fb.1.1700000123456.194673528",
                 ["post_reject", "subpage_visit"], ["marketing"],
                 "ignored_rejection", "first_party", "tracker"),
                ("misc", "gamma-media.co.uk", "/", "n7wq", ["post_reject"],
                 ["unclassified"], "compliant", "first_party", "unlikely_pi"),
                ("fr", "facebook.com", "/", "0aXb9YcQd2Ee7RfG8hIj3kLm",
                 ["subpage_visit"], [], "undeclared", "third_party", "tracker"),
            ],
        },
        "subpages": ["https://gamma-media.co.uk/video"],
    },
    {
        "site": "delta-travel.com",
        "cmp": "onetrust",
        "iterations": {"EU": 1, "US": 1},
        "banner": {
            "EU": {"consent_model": "opt-in", "reject_all_present": "true",
                   "button_labels": "Accept All|Reject All|Cookie Settings"},
            "US": {"consent_model": "opt-out", "reject_all_present": "false",
                   "button_labels": "OK|Cookie Settings"},
        },
        "declarations": [
            ("lang", "delta-travel.com", "C0001", "Stores the preferred display language"),
        ],
        "cookies": {
            "EU": [
                ("lang", "delta-travel.com", "/", "en-US", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "language"),
                ("track", "adnet.org", "/", "f4d9a27c5e8b4061b3a2c7d8e9f0a1b2",
                 ["post_reject"], [], "undeclared", "third_party", "tracker"),
            ],
            "US": [
                ("lang", "delta-travel.com", "/", "en-US", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "language"),
                ("track", "adnet.org", "/", "f4d9a27c5e8b4061b3a2c7d8e9f0a1b2",
                 ["post_reject"], [], "undeclared", "third_party", "tracker"),
                ("track2", "adnet.org", "/", "0b1c2d3e4f5a69788796a5b4c3d2e1f0",
                 ["subpage_visit"], [], "undeclared", "third_party", "tracker"),
            ],
        },
        "out_of_scope": [
            # request made while a foreign page was the context; never classified
            ("foreign", "delta-travel.com", "/", "x1", ["post_reject"],
             "https://partner-site.net/promo"),
        ],
        "subpages": ["https://delta-travel.com/deals"],
    },
    {
        "site": "epsilon-bank.com",
        "cmp": "onetrust",
        "iterations": {"EU": 1, "US": 1},
        "banner": {
            "EU": {"consent_model": "opt-in", "reject_all_present": "true"},
            "US": {"consent_model": "opt-in", "reject_all_present": "true"},
        },
        "declarations": [
            ("sessionid", "epsilon-bank.com", "C0001", "Authentication session id"),
            ("csrf", "epsilon-bank.com", "C0001", "Request forgery protection"),
        ],
        "cookies": {
            "EU": [
                ("sessionid", "epsilon-bank.com", "/", "q9Zr4Lm8Xw2Tn6Vb3Yc7Pd1Kf5Hg0Js",
                 ["post_reject"], ["C0001"], "compliant", "first_party", "tracker"),
                ("csrf", "epsilon-bank.com", "/", "ok", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "unlikely_pi"),
            ],
            "US": [
                ("sessionid", "epsilon-bank.com", "/", "q9Zr4Lm8Xw2Tn6Vb3Yc7Pd1Kf5Hg0Js",
                 ["post_reject"], ["C0001"], "compliant", "first_party", "tracker"),
                ("csrf", "epsilon-bank.com", "/", "ok", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "unlikely_pi"),
            ],
        },
        "subpages": [],
    },
    {
        "site": "zeta-games.com",
        "cmp": "cookiebot",
        "iterations": {"EU": 1, "US": 1},
        "banner": {
            "EU": {"consent_model": "opt-in", "reject_all_present": "true",
                   "consent_lifetime_days": "365"},
            "US": {"consent_model": "opt-in", "reject_all_present": "true",
                   "consent_lifetime_days": "180"},
        },
        "declarations": [
            ("YSC", "youtube.com", "statistics", "Registers a unique id for embedded video statistics"),
        ],
        "cookies": {
            "EU": [
                ("YSC", "youtube.com", "/", "H3jNx8Qw0dE", ["subpage_visit"],
                 ["statistics"], "ignored_rejection", "third_party", "tracker"),
                ("rnd", "zeta-games.com", "/", "Vt5Bq9Kz3Xc7Jm1Ns6Wd4Rf8Lh2Pg0Ty",
                 ["post_reject"], [], "undeclared", "first_party", "tracker"),
            ],
            "US": [
                ("YSC", "youtube.com", "/", "H3jNx8Qw0dE", ["post_reject", "subpage_visit"],
                 ["statistics"], "ignored_rejection", "third_party", "tracker"),
                ("rnd", "zeta-games.com", "/", "Vt5Bq9Kz3Xc7Jm1Ns6Wd4Rf8Lh2Pg0Ty",
                 ["post_reject"], [], "undeclared", "first_party", "tracker"),
            ],
        },
        "subpages": ["https://zeta-games.com/play"],
    },
    {
        "site": "eta-blog.org",
        "cmp": "onetrust",
        "iterations": {"EU": 1, "US": 1},
        "banner": {"EU": {"consent_model": "opt-in"}, "US": {"consent_model": "opt-in"}},
        # rejectable category still consented in the stored state: the
        # consent choice was not recorded, so nothing gets classified
        "snapshot_override": "groups=C0001:1,C0002:1,C0003:0",
        "declarations": [
            ("_ga", "eta-blog.org", "C0002", "Usage statistics"),
        ],
        "cookies": {
            "EU": [
                ("_ga", "eta-blog.org", "/", "GA1.2.1555666777.1700011111",
                 ["post_reject"], ["C0002"], None, "first_party", None),
            ],
            "US": [
                ("_ga", "eta-blog.org", "/", "GA1.2.1555666777.1700011111",
                 ["post_reject"], ["C0002"], None, "first_party", None),
            ],
        },
        "unclassified_site": True,
        "subpages": [],
    },
    {
        "site": "theta-sports.com",
        "cmp": "onetrust",
        "iterations": {"EU": 1, "US": 1},
        "banner": {
            "EU": {"consent_model": "opt-in", "reject_all_present": "true"},
            "US": {"consent_model": "opt-out", "reject_all_present": "false"},
        },
        "declarations": [
            ("_gat_#", "theta-sports.com", "C0002", "Throttles analytics request rate"),
            ("scores", "theta-sports.com", "C0001", "Remembers favorite teams"),
        ],
        "cookies": {
            "EU": [
                ("_gat_UA734210", "theta-sports.com", "/", "1",
                 ["post_reject"], ["C0002"], "ignored_rejection", "first_party", "unlikely_pi"),
                ("scores", "theta-sports.com", "/", "nfl", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "unlikely_pi"),
            ],
            "US": [
                ("_gat_UA734210", "theta-sports.com", "/", "1",
                 ["post_reject"], ["C0002"], "ignored_rejection", "first_party", "unlikely_pi"),
                ("scores", "theta-sports.com", "/", "nfl", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "unlikely_pi"),
                ("geo", "theta-sports.com", "/", "42.3314,-83.0458",
                 ["post_reject"], [], "undeclared", "first_party", "location"),
            ],
        },
        "subpages": ["https://theta-sports.com/scores"],
    },
    {
        "site": "iota-recipes.com",
        "cmp": "other",
        "iterations": {"EU": 1, "US": 1},
        "banner": {"EU": {}, "US": {}},
        "declarations": [],
        "categories": [],
        "cookies": {
            "EU": [
                ("uid", "iota-recipes.com", "/", "8c7b6a5948372615f4e3d2c1b0a99887",
                 ["post_reject"], [], "undeclared", "first_party", "tracker"),
            ],
            "US": [
                ("uid", "iota-recipes.com", "/", "8c7b6a5948372615f4e3d2c1b0a99887",
                 ["post_reject"], [], "undeclared", "first_party", "tracker"),
            ],
        },
        "subpages": [],
    },
    {
        "site": "kappa-store.com",
        "cmp": "onetrust",
        "iterations": {"EU": 1, "US": 1},
        "banner": {
            "EU": {"consent_model": "opt-in", "reject_all_present": "true",
                   "banner_position": "center"},
            "US": {"consent_model": "opt-in", "reject_all_present": "true",
                   "banner_position": "bottom"},
        },
        "declarations": [
            ("cart_session", "kappa-store.com", "C0001", "Holds the shopping cart"),
        ],
        "cookies": {
            "EU": [
                ("cart_session", "kappa-store.com", "/", "Wz4Xv8Yt2Qs6Np0Lm3Kj7Hg1Fd5Ba9",
                 ["post_reject"], ["C0001"], "compliant", "first_party", "tracker"),
                ("loc", "addthis.com", "/", "42.2808,-83.7430",
                 ["subpage_visit"], [], "undeclared", "third_party", "location"),
                ("client_ip", "kappa-store.com", "/", "198.51.100.23",
                 ["post_reject"], [], "undeclared", "first_party", "ip_address"),
            ],
            "US": [
                ("cart_session", "kappa-store.com", "/", "Wz4Xv8Yt2Qs6Np0Lm3Kj7Hg1Fd5Ba9",
                 ["post_reject"], ["C0001"], "compliant", "first_party", "tracker"),
                ("loc", "addthis.com", "/", "34.0522,-118.2437",
                 ["post_reject", "subpage_visit"], [], "undeclared", "third_party", "location"),
                ("client_ip", "kappa-store.com", "/", "203.0.113.77",
                 ["post_reject"], [], "undeclared", "first_party", "ip_address"),
            ],
        },
        "subpages": ["https://kappa-store.com/cart"],
    },
    {
        "site": "lambda-health.com",
        "cmp": "cookiebot",
        "iterations": {"EU": 1, "US": 1},
        "banner": {
            "EU": {"consent_model": "opt-in", "reject_all_present": "true"},
            "US": {"consent_model": "opt-in", "reject_all_present": "true"},
        },
        "declarations": [
            ("theme", "lambda-health.com", "preferences", "Remembers light or dark mode"),
        ],
        "cookies": {
            "EU": [
                ("theme", "lambda-health.com", "/", "dark", ["post_reject"],
                 ["preferences"], "ignored_rejection", "first_party", "unlikely_pi"),
            ],
            "US": [
                ("theme", "lambda-health.com", "/", "dark", ["post_reject"],
                 ["preferences"], "ignored_rejection", "first_party", "unlikely_pi"),
            ],
        },
        "subpages": [],
    },
    {
        "site": "mu-forum.com",
        "cmp": "onetrust",
        "iterations": {"EU": 2, "US": 1},
        "banner": {
            "EU": {"consent_model": "opt-in", "reject_all_present": "true"},
            "US": {"consent_model": "opt-in", "reject_all_present": "true"},
        },
        "declarations": [],
        "cookies": {
            # iteration 1 sees only A; iteration 2 sees A and B: union 2, mean 1.5
            "EU": [
                ("A", "mu-forum.com", "/", "a0b1c2d3e4f5061728394a5b6c7d8e9f",
                 ["post_reject"], [], "undeclared", "first_party", "tracker"),
                ("B", "mu-forum.com", "/", "9f8e7d6c5b4a39281706f5e4d3c2b1a0",
                 ["post_reject"], [], "undeclared", "first_party", "tracker"),
            ],
            "US": [
                ("A", "mu-forum.com", "/", "a0b1c2d3e4f5061728394a5b6c7d8e9f",
                 ["post_reject"], [], "undeclared", "first_party", "tracker"),
            ],
        },
        "iteration_cookie_names": {"EU": {1: ["A"], 2: ["A", "B"]}},
        "subpages": [],
    },
    {
        "site": "nu-weather.com",
        "cmp": "onetrust",
        "iterations": {"US": 1},
        "banner": {"US": {"consent_model": "opt-out"}},
        "declarations": [
            ("units", "nu-weather.com", "C0001", "Remembers metric or imperial units"),
        ],
        "cookies": {
            "US": [
                ("units", "nu-weather.com", "/", "imperial", ["post_reject"],
                 ["C0001"], "compliant", "first_party", "unlikely_pi"),
                ("pixel", "trackpixel.net", "/", "5a4b3c2d1e0f69788796a5b4c3d2e1f0",
                 ["post_reject"], [], "undeclared", "third_party", "tracker"),
            ],
        },
        "subpages": [],
    },
]


def categories_for(plan):
    if "categories" in plan:
        return plan["categories"]
    if plan["cmp"] == "cookiebot":
        return COOKIEBOT_CATEGORIES
    return ONETRUST_CATEGORIES


def snapshot_value(plan):
    if "snapshot_override" in plan:
        return plan["snapshot_override"]
    if plan["cmp"] == "cookiebot":
        return COOKIEBOT_REJECT_VALUE
    return ONETRUST_REJECT_GROUPS


def build_trace_records(plan, region, iteration):
    site = plan["site"]
    records = [
        {"kind": "meta", "trace_version": 1, "site": site, "region": region,
         "iteration": iteration}
    ]
    for cat_id, label, rejectable in categories_for(plan):
        records.append({
            "kind": "category", "category_id": cat_id, "label": label,
            "rejectable": rejectable,
            "consent_choice": "not_consent" if rejectable else "consent",
        })
    for name_pattern, host, cat_id, purpose in plan["declarations"]:
        records.append({
            "kind": "declaration", "name_pattern": name_pattern, "host": host,
            "category_id": cat_id, "purpose_text": purpose,
            "declared_duration": "365 days",
        })

    cookie_rows = plan["cookies"][region]
    allowed_names = None
    per_iter = plan.get("iteration_cookie_names", {}).get(region)
    if per_iter is not None:
        allowed_names = set(per_iter[iteration])

    request_counter = 0
    ts = BASE_TS
    phase_requests = {}
    for row in cookie_rows:
        name, domain, path, value, phases = row[0], row[1], row[2], row[3], row[4]
        if allowed_names is not None and name not in allowed_names:
            continue
        for phase in phases:
            if phase not in phase_requests:
                request_counter += 1
                request_id = f"r{request_counter}"
                page = (
                    f"https://{site}/" if phase != "subpage_visit"
                    else (plan["subpages"][0] if plan["subpages"] else f"https://{site}/p")
                )
                records.append({
                    "kind": "request", "request_id": request_id,
                    "url": page, "method": "GET", "initiator_frame": page,
                })
                phase_requests[phase] = request_id
            ts += 17
            records.append({
                "kind": "cookie", "request_id": phase_requests[phase],
                "name": name, "domain": domain, "path": path, "value": value,
                "observed_at": ts, "phase": phase,
            })

    for name, domain, path, value, phases, frame in plan.get("out_of_scope", []):
        request_counter += 1
        request_id = f"r{request_counter}"
        records.append({
            "kind": "request", "request_id": request_id,
            "url": frame, "method": "GET", "initiator_frame": frame,
        })
        for phase in phases:
            ts += 17
            records.append({
                "kind": "cookie", "request_id": request_id,
                "name": name, "domain": domain, "path": path, "value": value,
                "observed_at": ts, "phase": phase,
            })

    if plan["cmp"] != "other":
        records.append({
            "kind": "snapshot", "cmp": plan["cmp"],
            "raw_value": snapshot_value(plan),
            "consent_cookie_domain": site,
            "captured_at": BASE_TS + 60000,
            "page_url": f"https://{site}/",
        })
    banner = plan["banner"].get(region, {})
    if banner:
        records.append({"kind": "banner", "parameters": banner})
    for url in plan["subpages"]:
        records.append({"kind": "subpage", "url": url})
    return records


def expected_for(plan, region):
    """Ground truth for one (site, region), by counting the plan."""
    expected = {}
    pre_consent_only = []
    per_iter = plan.get("iteration_cookie_names", {}).get(region)
    for row in plan["cookies"][region]:
        name, domain, path, _value, phases, _cats, outcome, party, pi = row
        key = f"{name}|{domain}|{path}"
        if outcome is None and set(phases) == {"pre_consent"}:
            pre_consent_only.append(key)
            continue
        if outcome is None:
            continue
        expected[key] = {"outcome": outcome, "party": party, "pi": pi}
    out_of_scope = [
        f"{name}|{domain}|{path}"
        for name, domain, path, _v, _p, _f in plan.get("out_of_scope", [])
    ]
    violations = [
        meta["outcome"] for meta in expected.values() if meta["outcome"] != "compliant"
    ]
    iterations = plan["iterations"][region]
    violation_types = ("ignored_rejection", "undeclared", "wrong_category")
    if per_iter is not None:
        mean_count = sum(len(v) for v in per_iter.values()) / len(per_iter)
        per_iter_violations = []
        for names in per_iter.values():
            tally = {v: 0.0 for v in violation_types}
            for key, meta in expected.items():
                if key.split("|")[0] in names and meta["outcome"] in tally:
                    tally[meta["outcome"]] += 1.0
            per_iter_violations.append(tally)
        mean_violations = {
            v: sum(t[v] for t in per_iter_violations) / len(per_iter_violations)
            for v in violation_types
        }
    else:
        # the merge counts every observed transmission, including cookies on
        # out-of-scope requests (scope filtering happens at classification)
        mean_count = len(plan["cookies"][region]) + len(plan.get("out_of_scope", []))
        mean_violations = {v: 0.0 for v in violation_types}
        for meta in expected.values():
            if meta["outcome"] in mean_violations:
                mean_violations[meta["outcome"]] += 1.0
    if plan.get("unclassified_site", False):
        mean_violations = {v: 0.0 for v in violation_types}
    return {
        "classified": not plan.get("unclassified_site", False),
        "expected": expected,
        "pre_consent_only": pre_consent_only,
        "out_of_scope": out_of_scope,
        "compliant_site": len(violations) == 0,
        "iterations": iterations,
        "mean_cookie_count": float(mean_count),
        "mean_violation_counts": mean_violations,
    }


def banner_diff_count(a: dict, b: dict) -> int:
    keys = set(a) | set(b)
    multi = {"category_names", "button_labels"}

    def canon(key, value):
        if key in multi:
            return frozenset(p.strip() for p in value.split("|"))
        return " ".join(value.split())

    return sum(
        1
        for k in keys
        if k not in a or k not in b or canon(k, a[k]) != canon(k, b[k])
    )


def make_corpus(out_dir: Path) -> None:
    corpus_dir = out_dir / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"sites": [], "deltas": {}, "banner_matrix": {}}

    for plan in SITE_PLANS:
        for region in sorted(plan["iterations"]):
            for iteration in range(1, plan["iterations"][region] + 1):
                records = build_trace_records(plan, region, iteration)
                name = f"{plan['site']}__{region}__{iteration}.jsonl"
                (corpus_dir / name).write_bytes(write_records(records))
            entry = {"site": plan["site"], "region": region}
            entry.update(expected_for(plan, region))
            manifest["sites"].append(entry)

    # hand-computed deltas vs the EU baseline (plain plan arithmetic)
    baseline = {
        e["site"]: e for e in manifest["sites"] if e["region"] == "EU"
    }
    violation_types = ("ignored_rejection", "undeclared", "wrong_category")
    for entry in manifest["sites"]:
        site = entry["site"]
        if site not in baseline:
            continue
        base = baseline[site]
        own, ref = entry["mean_violation_counts"], base["mean_violation_counts"]
        manifest["deltas"].setdefault(entry["region"], {})[site] = {
            "cookies": entry["mean_cookie_count"] - base["mean_cookie_count"],
            **{v: own[v] - ref[v] for v in violation_types},
        }

    # pairwise banner diff counts over sites present in both regions
    regions = sorted({e["region"] for e in manifest["sites"]})
    for i, ra in enumerate(regions):
        for rb in regions[i + 1:]:
            total = 0
            for plan in SITE_PLANS:
                if ra in plan["banner"] and rb in plan["banner"]:
                    if ra in plan["iterations"] and rb in plan["iterations"]:
                        total += banner_diff_count(plan["banner"][ra], plan["banner"][rb])
            manifest["banner_matrix"][f"{ra}|{rb}"] = total

    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


# --- labeled banner-button pages -------------------------------------------

GOLD_SPECS = [
    {"tag": "button", "text": "Cookie Settings", "id": "onetrust-pc-btn-handler"},
    {"tag": "button", "text": "Manage Preferences", "class": "ot-sdk-show-settings"},
    {"tag": "a", "text": "Manage Cookies", "href": "#", "onclick": "Optanon.ToggleInfoDisplay()"},
    {"tag": "a", "text": "Cookie Preferences", "href": "javascript:Cookiebot.renew()"},
    {"tag": "button", "text": "Privacy Settings", "class": "CybotCookiebotDialogBodyButton"},
    {"tag": "a", "text": "Do Not Sell My Personal Information", "href": "#", "class": "ot-sdk-show-settings"},
    {"tag": "button", "text": "Customize Settings", "class": "consent-banner-btn"},
    {"tag": "span", "text": "Review Cookies", "class": "cookie-review-link"},
    {"tag": "div", "text": "Manage Cookie Settings", "class": "cc-settings-dialog-open"},
    {"tag": "button", "text": "Change Consent", "id": "cookie-consent-change"},
    {"tag": "a", "text": "Update Cookie Preferences", "href": "/cookie-preferences"},
    {"tag": "button", "text": "Consent Choices", "id": "consent-choices"},
    {"tag": "button", "text": "", "aria-label": "Cookie settings",
     "class": "icon-button gear", "id": "ot-floating-button"},
    {"tag": "a", "text": "Privacy Preference Center", "href": "#",
     "onclick": "OneTrust.ToggleInfoDisplay()"},
    {"tag": "span", "text": "Set Preferences", "class": "cookie-consent-open"},
    {"tag": "button", "text": "Adjust Consent", "class": "cmp-settings"},
]

NAV_LINKS = [
    "Home", "About Us", "Products", "Pricing", "Contact", "Blog", "Careers",
    "Sign In", "Register", "Search", "Support", "Documentation", "Partners",
    "Events", "Press", "Investors", "Community", "Status",
]
FOOTER_LINKS = [
    "Privacy Policy", "Terms of Service", "Imprint", "Accessibility",
    "Site Map", "Help Center", "Security", "Licenses", "Legal Notice",
]
HARD_NEGATIVES = [
    {"tag": "a", "text": "View Cookie Policy", "href": "/cookie-policy"},
    {"tag": "a", "text": "Cookie Policy", "href": "/cookies"},
    {"tag": "a", "text": "Privacy Notice", "href": "/privacy"},
    {"tag": "a", "text": "Your Privacy Choices", "href": "/choices"},
    {"tag": "span", "text": "We value your privacy", "class": "banner-title"},
]
ACTION_BUTTONS = [
    "Subscribe", "Add to Cart", "Buy Now", "Download", "Learn More",
    "Read More", "Get Started", "Try Free", "Book a Demo", "Watch Video",
]
MARKETING_BLURBS = [
    "We use cookies and similar technologies to improve your browsing "
    "experience analyze site traffic and personalize content across our "
    "pages and services",
    "This website stores data such as cookies to enable important site "
    "functionality including analytics targeting and personalization for "
    "a better experience",
    "Our partners collect information about your visit to present more "
    "relevant advertising and to help us understand which settings and "
    "preferences matter most to visitors",
]


def render_element(spec, text=None):
    tag = spec["tag"]
    attrs = []
    for attr in ("id", "class", "href", "onclick", "aria-label", "style"):
        if attr in spec:
            attrs.append(f'{attr}="{spec[attr]}"')
    inner = spec.get("text", text or "")
    attr_text = (" " + " ".join(attrs)) if attrs else ""
    return f"<{tag}{attr_text}>{inner}</{tag}>"


def make_labeled_pages(out_dir: Path, n_pages=72, seed=20240601) -> None:
    rng = random.Random(seed)
    buttons_dir = out_dir / "buttons"
    buttons_dir.mkdir(parents=True, exist_ok=True)

    records = []
    total_gold = 0
    for index in range(n_pages):
        page_id = f"p{index:03d}"
        n_gold = 1 if rng.random() < 0.7 else 2
        golds = rng.sample(GOLD_SPECS, n_gold)
        body_parts = []

        body_parts.append("<header><nav>")
        for text in rng.sample(NAV_LINKS, rng.randint(6, 10)):
            slug = text.lower().replace(" ", "-")
            body_parts.append(f'<a href="/{slug}">{text}</a>')
        body_parts.append("</nav></header>")

        body_parts.append("<main>")
        body_parts.append(f"<h1>Site {index}</h1>")
        blurb = rng.choice(MARKETING_BLURBS)
        body_parts.append(f"<div class='copy'>{blurb}</div>")
        for text in rng.sample(ACTION_BUTTONS, rng.randint(3, 6)):
            body_parts.append(f'<button class="cta">{text}</button>')
        if rng.random() < 0.5:
            body_parts.append(
                '<span style="display:none">Manage consent</span>'
            )  # hidden duplicate must never become a candidate
        body_parts.append("</main>")

        body_parts.append("<footer>")
        footer_items = rng.sample(FOOTER_LINKS, rng.randint(4, 7))
        if rng.random() < 0.45:
            footer_items.append(None)  # placeholder for a hard negative
        gold_positions = rng.sample(range(len(footer_items) + 1), n_gold)
        rendered_footer = []
        for slot, item in enumerate(footer_items):
            if item is None:
                rendered_footer.append(render_element(rng.choice(HARD_NEGATIVES)))
            else:
                slug = item.lower().replace(" ", "-")
                rendered_footer.append(f'<a href="/{slug}">{item}</a>')
        for position, gold in zip(sorted(gold_positions, reverse=True), golds):
            rendered_footer.insert(position, render_element(gold))
        body_parts.extend(rendered_footer)
        body_parts.append("</footer>")

        html = (
            "<html><head><title>fixture</title></head><body>"
            + "".join(body_parts)
            + "</body></html>"
        )
        records.append({"kind": "page", "page_id": page_id, "html": html})

        # label by locating the rendered gold markup in the candidate walk
        from consentaudit.banner import extract_candidates

        wanted = {(g["tag"], g.get("text", ""), g.get("id", ""), g.get("class", "")) for g in golds}
        locators = []
        for candidate in extract_candidates(html):
            probe = (
                candidate.tag,
                candidate.inner_text,
                candidate.attributes.get("id", ""),
                candidate.attributes.get("class", ""),
            )
            if probe in wanted:
                locators.append(candidate.locator)
        assert len(locators) == n_gold, (page_id, wanted, locators)
        total_gold += len(locators)
        for locator in sorted(locators):
            records.append(
                {"kind": "button_label", "page_id": page_id, "locator": locator}
            )

    assert total_gold >= 80, total_gold
    (buttons_dir / "labeled_pages.jsonl").write_bytes(write_records(records))
    print(f"labeled pages: {n_pages}, gold buttons: {total_gold}")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="tests/fixtures")
    args = parser.parse_args()
    out_dir = Path(args.out)
    make_corpus(out_dir)
    make_labeled_pages(out_dir)
    print(f"fixtures written under {out_dir}")


if __name__ == "__main__":
    main()
