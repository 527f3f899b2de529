"""Personal-information detection over cookie names, values, and purposes.

The detector is deliberately lightweight: keyword lists and regexes from a
versioned data file, a plausibility-gated Base64 decode, and a pattern-aware
entropy estimate that discounts dictionary words, sequences, repeats, and
dates before falling back to brute-force charset size.
"""

from __future__ import annotations

import base64
import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import IO

from .matching import match_domain, match_name
from .model import CookieInstance, CookieKey
from .traceio import read_records

DEFAULT_ENTROPY_THRESHOLD = 60.0


class PiCategory(Enum):
    TRACKER = "tracker"
    LOCATION = "location"
    IP_ADDRESS = "ip_address"
    LANGUAGE = "language"
    UNLIKELY_PI = "unlikely_pi"


# Table rows are disjoint, so multiple hits need one winner; the most
# specific signal wins.
_PRIORITY = (
    PiCategory.IP_ADDRESS,
    PiCategory.LOCATION,
    PiCategory.LANGUAGE,
    PiCategory.TRACKER,
)


@dataclass(frozen=True)
class PiLabel:
    category: PiCategory
    signals: tuple[str, ...]


@dataclass(frozen=True)
class PurposeEntry:
    name_pattern: str
    host: str | None
    purpose_text: str
    category_hint: str | None


@dataclass(frozen=True)
class PurposeDatabase:
    """Local snapshot of cookie-purpose lookups (no network calls)."""

    entries: tuple[PurposeEntry, ...] = ()

    @staticmethod
    def from_container(data: bytes | IO[bytes]) -> "PurposeDatabase":
        entries = []
        for _, record in read_records(data):
            if record.get("kind") != "purpose":
                continue
            entries.append(
                PurposeEntry(
                    name_pattern=record["name_pattern"],
                    host=record.get("host"),
                    purpose_text=record.get("purpose_text", ""),
                    category_hint=record.get("category_hint"),
                )
            )
        return PurposeDatabase(tuple(sorted(entries, key=lambda e: (e.name_pattern, e.host or ""))))

    def lookup(self, name: str, domain: str) -> PurposeEntry | None:
        for entry in self.entries:
            if not match_name(entry.name_pattern, name):
                continue
            if entry.host is not None and not match_domain(entry.host, domain):
                continue
            return entry
        return None


@lru_cache(maxsize=1)
def _signals() -> dict:
    text = (
        resources.files("consentaudit")
        .joinpath("data/pi_signals.json")
        .read_text(encoding="utf-8")
    )
    data = json.loads(text)
    data["_keyword_res"] = {
        group: [
            re.compile(r"\b" + re.escape(kw).replace(r"\ ", r"[\s_-]*") + r"\b")
            for kw in data[group]
        ]
        for group in (
            "location_keywords",
            "ip_keywords",
            "language_keywords",
            "tracker_keywords",
        )
    }
    data["_tracker_value_res"] = [
        re.compile(p) for p in data["tracker_value_patterns"]
    ]
    data["_locale_re"] = re.compile(data["locale_value_pattern"])
    return data


_IPV4_RE = re.compile(r"(?<!\d)(\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3})(?!\d)")
_IPV6_RE = re.compile(
    r"(?<![0-9A-Fa-f:])"
    r"(?:[0-9A-Fa-f]{1,4}:){2,7}(?::|[0-9A-Fa-f]{1,4})"
    r"(?![0-9A-Fa-f:])"
)
_GPS_RE = re.compile(
    r"(?<![\d.])(-?\d{1,3}\.\d{3,})\s*[,;|]\s*(-?\d{1,3}\.\d{3,})(?![\d.])"
)
_BASE64_RE = re.compile(r"^[A-Za-z0-9+/]+={0,2}$")


def _contains_ipv4(text: str) -> bool:
    return any(
        all(int(octet) <= 255 for octet in m.groups())
        for m in _IPV4_RE.finditer(text)
    )


def _contains_gps(text: str) -> bool:
    return any(
        abs(float(m.group(1))) <= 90.0 and abs(float(m.group(2))) <= 180.0
        for m in _GPS_RE.finditer(text)
    )


def plausible_base64(value: str) -> bool:
    """Gate before attempting a decode: length >= 8, strict Base64 charset,
    and a length the padding rules allow."""
    if len(value) < 8 or not _BASE64_RE.match(value):
        return False
    return len(value) % 4 in (0, 2, 3)  # 1 mod 4 can never pad out


def decode_base64(value: str) -> str | None:
    if not plausible_base64(value):
        return None
    padded = value + "=" * (-len(value) % 4)
    try:
        decoded = base64.b64decode(padded, validate=True)
        text = decoded.decode("utf-8")
    except Exception:
        return None
    printable = sum(ch.isprintable() for ch in text)
    if not text or printable / len(text) < 0.9:
        return None
    return text


def _name_tokens(name: str) -> set[str]:
    return {t for t in re.split(r"[^0-9a-z]+", name.lower()) if t}


def detect_pi(
    cookie: CookieInstance,
    purpose_text: str = "",
    db: PurposeDatabase | None = None,
    entropy_threshold: float = DEFAULT_ENTROPY_THRESHOLD,
) -> PiLabel:
    """Label one cookie. Total: anything unrecognized is unlikely-PI."""
    cfg = _signals()
    hits: dict[PiCategory, list[str]] = {c: [] for c in _PRIORITY}

    db_entry = db.lookup(cookie.name, cookie.domain) if db is not None else None
    purpose_blobs = [purpose_text.lower()]
    if db_entry is not None:
        purpose_blobs.append(db_entry.purpose_text.lower())
        hint = (db_entry.category_hint or "").lower()
        for category in _PRIORITY:
            if hint == category.value:
                hits[category].append("purpose_db:hint")

    value_texts = [("value", cookie.value)]
    decoded = decode_base64(cookie.value)
    if decoded is not None:
        value_texts.append(("base64", decoded))

    # regex signals on the value (and its decoded form)
    for origin, text in value_texts:
        if _contains_ipv4(text):
            hits[PiCategory.IP_ADDRESS].append(f"regex:ipv4:{origin}")
        if _IPV6_RE.search(text):
            hits[PiCategory.IP_ADDRESS].append(f"regex:ipv6:{origin}")
        if _contains_gps(text):
            hits[PiCategory.LOCATION].append(f"regex:gps:{origin}")
        for pattern in cfg["_tracker_value_res"]:
            if pattern.match(text):
                hits[PiCategory.TRACKER].append(f"regex:tracker:{origin}")
                break

    # keyword signals over name tokens and purpose text
    tokens = _name_tokens(cookie.name)
    groups = (
        (PiCategory.IP_ADDRESS, "ip_name_tokens", "ip_keywords"),
        (PiCategory.LOCATION, "location_name_tokens", "location_keywords"),
        (PiCategory.LANGUAGE, "language_name_tokens", "language_keywords"),
        (PiCategory.TRACKER, "tracker_name_tokens", "tracker_keywords"),
    )
    for category, token_group, keyword_group in groups:
        if tokens.intersection(cfg[token_group]):
            hits[category].append("keyword:name")
        for blob in purpose_blobs:
            if blob and any(rx.search(blob) for rx in cfg["_keyword_res"][keyword_group]):
                hits[category].append("keyword:purpose")
                break

    # locale-shaped values only count when the name hints at language
    if hits[PiCategory.LANGUAGE] and cfg["_locale_re"].match(cookie.value):
        hits[PiCategory.LANGUAGE].append("regex:locale")

    _, high = entropy_estimate(cookie.value, threshold=entropy_threshold)
    if high:
        hits[PiCategory.TRACKER].append("high_entropy")

    for category in _PRIORITY:
        if hits[category]:
            fired = [s for cat in _PRIORITY for s in hits[cat]]
            return PiLabel(category=category, signals=tuple(dict.fromkeys(fired)))
    return PiLabel(category=PiCategory.UNLIKELY_PI, signals=())


# --- entropy ---------------------------------------------------------------


def _charset_bits(text: str) -> float:
    size = 0
    if any(c.islower() for c in text):
        size += 26
    if any(c.isupper() for c in text):
        size += 26
    if any(c.isdigit() for c in text):
        size += 10
    if any(not c.isalnum() for c in text):
        size += 33
    return math.log2(size) if size else 0.0


def _pattern_spans(value: str, words: list[str]) -> list[tuple[int, int, float]]:
    """Candidate (start, end, bits) spans for discountable structure."""
    spans: list[tuple[int, int, float]] = []
    n = len(value)

    # runs of one repeated character
    i = 0
    while i < n:
        j = i + 1
        while j < n and value[j] == value[i]:
            j += 1
        if j - i >= 3:
            spans.append((i, j, _charset_bits(value[i]) + math.log2(j - i)))
        i = j

    # ascending/descending ordinal runs (abc, 987)
    i = 0
    while i < n - 2:
        step = ord(value[i + 1]) - ord(value[i])
        if abs(step) == 1 and value[i].isalnum():
            j = i + 1
            while j + 1 < n and ord(value[j + 1]) - ord(value[j]) == step:
                j += 1
            if j - i + 1 >= 3:
                base = 10 if value[i].isdigit() else 26
                spans.append((i, j + 1, math.log2(base) + math.log2(j - i + 1) + 1))
                i = j
        i += 1

    # four-digit years
    for m in re.finditer(r"(?:19|20)\d{2}", value):
        spans.append((m.start(), m.end(), math.log2(200)))
    # compact day-month-year shapes
    for m in re.finditer(r"\d{2}[-/.]\d{2}[-/.]\d{2,4}", value):
        spans.append((m.start(), m.end(), math.log2(365 * 200)))

    # dictionary words, rank-weighted
    lowered = value.lower()
    for rank, word in enumerate(words):
        if len(word) < 3:
            continue
        start = 0
        while True:
            idx = lowered.find(word, start)
            if idx < 0:
                break
            matched = value[idx : idx + len(word)]
            case_penalty = 0.0 if matched.islower() else 1.0
            spans.append((idx, idx + len(word), math.log2(rank + 2) + case_penalty))
            start = idx + 1
    return spans


def entropy_estimate(
    value: str, threshold: float = DEFAULT_ENTROPY_THRESHOLD
) -> tuple[float, bool]:
    """Pattern-aware strength estimate of a cookie value, in bits.

    Minimal-cost segmentation: each position either pays the brute-force
    per-character cost of the value's character classes or gets covered by
    a discounted pattern span.
    """
    if not value:
        return (0.0, False)
    per_char = _charset_bits(value)
    spans = _pattern_spans(value, _signals()["common_words"])
    by_end: dict[int, list[tuple[int, float]]] = {}
    for start, end, bits in spans:
        by_end.setdefault(end, []).append((start, bits))
    n = len(value)
    cost = [0.0] * (n + 1)
    for j in range(1, n + 1):
        best = cost[j - 1] + per_char
        for start, bits in by_end.get(j, ()):
            best = min(best, cost[start] + bits)
        cost[j] = best
    bits = cost[n]
    return (bits, bits >= threshold)


# --- corpus summary ---------------------------------------------------------


@dataclass
class PiBreakdown:
    """Per-region percentage of classified cookies in each PI category."""

    rows: dict[str, dict[PiCategory, float]] = field(default_factory=dict)
    counts: dict[str, dict[PiCategory, int]] = field(default_factory=dict)
    likely_pi_fraction: float = 0.0


def likely_pi(label: PiLabel) -> bool:
    return label.category is not PiCategory.UNLIKELY_PI


def summarize_pi(
    report, labels: dict[tuple[str, str, CookieKey], PiLabel]
) -> PiBreakdown:
    """Aggregate labels over a CorpusReport's classified cookies."""
    breakdown = PiBreakdown()
    total = 0
    total_likely = 0
    per_region: dict[str, dict[PiCategory, int]] = {}
    for (site, region), site_report in sorted(report.site_reports.items()):
        counts = per_region.setdefault(region, {c: 0 for c in PiCategory})
        for classification in site_report.classifications:
            label = labels[(site, region, classification.cookie_key)]
            counts[label.category] += 1
            total += 1
            if likely_pi(label):
                total_likely += 1
    for region, counts in sorted(per_region.items()):
        region_total = sum(counts.values())
        breakdown.counts[region] = dict(counts)
        breakdown.rows[region] = {
            category: (100.0 * count / region_total if region_total else 0.0)
            for category, count in counts.items()
        }
    breakdown.likely_pi_fraction = total_likely / total if total else 0.0
    return breakdown


def label_corpus(
    report,
    db: PurposeDatabase | None = None,
    entropy_threshold: float = DEFAULT_ENTROPY_THRESHOLD,
) -> dict[tuple[str, str, CookieKey], PiLabel]:
    """Label every classified cookie in a corpus, purpose text included.

    Purpose text comes from the cookie's matched declaration when present,
    with the purpose database as fallback.
    """
    labels: dict[tuple[str, str, CookieKey], PiLabel] = {}
    for (site, region), site_report in report.site_reports.items():
        for classification in site_report.classifications:
            key = classification.cookie_key
            cookie = CookieInstance(
                name=key[0],
                domain=key[1],
                path=key[2],
                value=site_report.cookie_values.get(key, ""),
                observed_at=0,
                request_id="",
                phase=classification.phase_first_seen,
            )
            labels[(site, region, key)] = detect_pi(
                cookie,
                purpose_text=site_report.cookie_purposes.get(key, ""),
                db=db,
                entropy_threshold=entropy_threshold,
            )
    return labels
