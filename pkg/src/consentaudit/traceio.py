"""Trace container parsing, serialization, and iteration merging.

Wire format (trace_version 1): UTF-8, one JSON object per line, typed by
a "kind" field. Kinds: meta, request, cookie, declaration, category,
snapshot, banner, subpage. Cookie records reference their request via
request_id, so files stay appendable while a crawl is running.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable

from .errors import (
    EmptyInput,
    InvariantViolation,
    MalformedTrace,
    MixedKeys,
    SchemaViolation,
)
from .model import (
    BannerConfig,
    CategoryDeclaration,
    Choice,
    Cmp,
    CmpDeclaration,
    ConsentStateSnapshot,
    CookieInstance,
    CookieKey,
    CrawlTrace,
    Phase,
    RequestRecord,
    normalize_domain,
)
from .psl import registered_domain

TRACE_VERSION = 1


# --- generic line-delimited container -------------------------------------


def read_records(data: bytes | IO[bytes]) -> list[tuple[int, dict]]:
    """Yield (byte_offset, record) pairs; raises MalformedTrace on bad lines."""
    raw = data if isinstance(data, bytes) else data.read()
    records: list[tuple[int, dict]] = []
    offset = 0
    for line in raw.split(b"\n"):
        stripped = line.strip()
        if stripped:
            try:
                record = json.loads(stripped.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                raise MalformedTrace(f"unreadable record: {exc}", offset) from exc
            if not isinstance(record, dict):
                raise MalformedTrace("record is not an object", offset)
            records.append((offset, record))
        offset += len(line) + 1
    return records


def write_records(records: Iterable[dict]) -> bytes:
    lines = [
        json.dumps(r, ensure_ascii=False, separators=(", ", ": "))
        for r in records
    ]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _require(record: dict, field: str, offset: int):
    if field not in record:
        raise SchemaViolation(
            f"record at byte {offset} is missing required field {field!r}",
            field=field,
        )
    return record[field]


def _enum(cls, value, field: str, offset: int):
    try:
        return cls(value)
    except ValueError:
        raise SchemaViolation(
            f"record at byte {offset}: {value!r} is not a valid {field}",
            field=field,
        ) from None


# --- trace parsing ---------------------------------------------------------


def parse_trace(data: bytes | IO[bytes]) -> CrawlTrace:
    """Parse one trace document; all domains come out normalized."""
    records = read_records(data)
    meta: dict | None = None
    requests: list[tuple[str, dict]] = []  # (request_id, fields) in file order
    cookies_by_request: dict[str, list[CookieInstance]] = {}
    declarations: list[CmpDeclaration] = []
    categories: list[CategoryDeclaration] = []
    snapshots: list[ConsentStateSnapshot] = []
    banner: BannerConfig | None = None
    subpages: list[str] = []

    for offset, record in records:
        kind = _require(record, "kind", offset)
        if kind == "meta":
            if meta is not None:
                raise SchemaViolation(f"duplicate meta record at byte {offset}")
            version = _require(record, "trace_version", offset)
            if version != TRACE_VERSION:
                raise SchemaViolation(
                    f"unsupported trace_version {version!r}", field="trace_version"
                )
            meta = record
        elif kind == "request":
            requests.append((_require(record, "request_id", offset), record))
        elif kind == "cookie":
            cookie = CookieInstance(
                name=_require(record, "name", offset),
                domain=normalize_domain(_require(record, "domain", offset)),
                path=_require(record, "path", offset),
                value=_require(record, "value", offset),
                observed_at=int(_require(record, "observed_at", offset)),
                request_id=_require(record, "request_id", offset),
                phase=_enum(Phase, _require(record, "phase", offset), "phase", offset),
            )
            cookies_by_request.setdefault(cookie.request_id, []).append(cookie)
        elif kind == "declaration":
            declarations.append(
                CmpDeclaration(
                    name_pattern=_require(record, "name_pattern", offset),
                    host=normalize_domain(_require(record, "host", offset)),
                    category_id=_require(record, "category_id", offset),
                    purpose_text=record.get("purpose_text", ""),
                    declared_duration=record.get("declared_duration", ""),
                )
            )
        elif kind == "category":
            categories.append(
                CategoryDeclaration(
                    category_id=_require(record, "category_id", offset),
                    label=_require(record, "label", offset),
                    rejectable=bool(_require(record, "rejectable", offset)),
                    consent_choice=_enum(
                        Choice,
                        _require(record, "consent_choice", offset),
                        "consent_choice",
                        offset,
                    ),
                )
            )
        elif kind == "snapshot":
            snapshots.append(
                ConsentStateSnapshot(
                    cmp=_enum(Cmp, _require(record, "cmp", offset), "cmp", offset),
                    raw_value=_require(record, "raw_value", offset),
                    consent_cookie_domain=normalize_domain(
                        _require(record, "consent_cookie_domain", offset)
                    ),
                    captured_at=int(_require(record, "captured_at", offset)),
                    page_url=_require(record, "page_url", offset),
                )
            )
        elif kind == "banner":
            if banner is not None:
                raise SchemaViolation(f"duplicate banner record at byte {offset}")
            params = _require(record, "parameters", offset)
            if not isinstance(params, dict):
                raise SchemaViolation("banner parameters must be an object")
            banner = BannerConfig.from_mapping(params)
        elif kind == "subpage":
            subpages.append(_require(record, "url", offset))
        else:
            raise SchemaViolation(f"unknown record kind {kind!r} at byte {offset}")

    if meta is None:
        raise SchemaViolation("trace has no meta record", field="meta")

    request_records = []
    seen_ids = set()
    for request_id, fields in requests:
        if request_id in seen_ids:
            raise SchemaViolation(f"duplicate request_id {request_id!r}")
        seen_ids.add(request_id)
        request_records.append(
            RequestRecord(
                request_id=request_id,
                url=_require(fields, "url", 0),
                method=fields.get("method", "GET"),
                attached_cookies=tuple(cookies_by_request.pop(request_id, ())),
                initiator_frame=fields.get("initiator_frame", ""),
            )
        )
    if cookies_by_request:
        orphan = next(iter(cookies_by_request))
        raise SchemaViolation(
            f"cookie references unknown request_id {orphan!r}", field="request_id"
        )

    trace = CrawlTrace(
        site=normalize_domain(_require(meta, "site", 0)),
        region=_require(meta, "region", 0),
        iteration=int(_require(meta, "iteration", 0)),
        requests=tuple(request_records),
        declarations=tuple(
            sorted(declarations, key=lambda d: (d.category_id, d.name_pattern, d.host))
        ),
        categories=tuple(sorted(categories, key=lambda c: c.category_id)),
        snapshots=tuple(sorted(snapshots, key=lambda s: s.captured_at)),
        banner=banner or BannerConfig(),
        subpages_visited=tuple(subpages),
    )
    _check_subpage_scope(trace)
    return trace


def _check_subpage_scope(trace: CrawlTrace):
    from urllib.parse import urlsplit

    scope = registered_domain(trace.consent_domain())
    for url in trace.subpages_visited:
        host = urlsplit(url).hostname
        if not host:
            raise InvariantViolation(f"subpage url {url!r} has no host")
        if registered_domain(host) != scope:
            raise InvariantViolation(
                f"subpage url {url!r} is outside the consent scope {scope!r}"
            )


def load_trace(path) -> CrawlTrace:
    with open(path, "rb") as fh:
        return parse_trace(fh)


# --- trace serialization ----------------------------------------------------


def serialize_trace(trace: CrawlTrace) -> bytes:
    """Canonical serialization; parse(serialize(parse(x))) == parse(x)."""
    records: list[dict] = [
        {
            "kind": "meta",
            "trace_version": TRACE_VERSION,
            "site": trace.site,
            "region": trace.region,
            "iteration": trace.iteration,
        }
    ]
    for cat in trace.categories:
        records.append(
            {
                "kind": "category",
                "category_id": cat.category_id,
                "label": cat.label,
                "rejectable": cat.rejectable,
                "consent_choice": cat.consent_choice.value,
            }
        )
    for decl in trace.declarations:
        records.append(
            {
                "kind": "declaration",
                "name_pattern": decl.name_pattern,
                "host": decl.host,
                "category_id": decl.category_id,
                "purpose_text": decl.purpose_text,
                "declared_duration": decl.declared_duration,
            }
        )
    for req in trace.requests:
        records.append(
            {
                "kind": "request",
                "request_id": req.request_id,
                "url": req.url,
                "method": req.method,
                "initiator_frame": req.initiator_frame,
            }
        )
        for cookie in req.attached_cookies:
            records.append(
                {
                    "kind": "cookie",
                    "request_id": cookie.request_id,
                    "name": cookie.name,
                    "domain": cookie.domain,
                    "path": cookie.path,
                    "value": cookie.value,
                    "observed_at": cookie.observed_at,
                    "phase": cookie.phase.value,
                }
            )
    for snap in trace.snapshots:
        records.append(
            {
                "kind": "snapshot",
                "cmp": snap.cmp.value,
                "raw_value": snap.raw_value,
                "consent_cookie_domain": snap.consent_cookie_domain,
                "captured_at": snap.captured_at,
                "page_url": snap.page_url,
            }
        )
    if trace.banner.parameters:
        records.append({"kind": "banner", "parameters": trace.banner.as_dict()})
    for url in trace.subpages_visited:
        records.append({"kind": "subpage", "url": url})
    return write_records(records)


# --- iteration merging ------------------------------------------------------


class MergeMode(Enum):
    UNION = "union"
    MEAN = "mean"


@dataclass(frozen=True)
class MergedAudit:
    """Repeated measurements of one (site, region), merged."""

    site: str
    region: str
    mode: MergeMode
    traces: tuple[CrawlTrace, ...]
    cookie_instances: dict[CookieKey, tuple[CookieInstance, ...]]
    mean_cookie_count: float

    @property
    def union_size(self) -> int:
        return len(self.cookie_instances)

    @property
    def iterations(self) -> tuple[int, ...]:
        return tuple(t.iteration for t in self.traces)

    def declarations(self) -> tuple[CmpDeclaration, ...]:
        merged = {d for t in self.traces for d in t.declarations}
        return tuple(sorted(merged, key=lambda d: (d.category_id, d.name_pattern, d.host)))

    def categories(self) -> tuple[CategoryDeclaration, ...]:
        merged: dict[str, CategoryDeclaration] = {}
        for t in self.traces:
            for cat in t.categories:
                prior = merged.get(cat.category_id)
                if prior is not None and prior != cat:
                    raise InvariantViolation(
                        f"category {cat.category_id!r} is inconsistent "
                        "across iterations"
                    )
                merged[cat.category_id] = cat
        return tuple(sorted(merged.values(), key=lambda c: c.category_id))


def merge_iterations(
    traces: list[CrawlTrace], mode: MergeMode = MergeMode.UNION
) -> MergedAudit:
    """Merge repeated measurements of the same (site, region)."""
    if not traces:
        raise EmptyInput("merge_iterations needs at least one trace")
    site, region = traces[0].site, traces[0].region
    for t in traces:
        if (t.site, t.region) != (site, region):
            raise MixedKeys(
                f"cannot merge ({t.site}, {t.region}) into ({site}, {region})"
            )
    ordered = tuple(sorted(traces, key=lambda t: t.iteration))
    seen_iterations = [t.iteration for t in ordered]
    if len(set(seen_iterations)) != len(seen_iterations):
        raise InvariantViolation(
            f"duplicate iteration among {seen_iterations} for ({site}, {region})"
        )

    instances: dict[CookieKey, list[CookieInstance]] = {}
    per_iteration_counts: list[int] = []
    for t in ordered:
        keys_here = set()
        for cookie in t.cookies():
            instances.setdefault(cookie.key, []).append(cookie)
            keys_here.add(cookie.key)
        per_iteration_counts.append(len(keys_here))

    return MergedAudit(
        site=site,
        region=region,
        mode=mode,
        traces=ordered,
        cookie_instances={k: tuple(v) for k, v in instances.items()},
        mean_cookie_count=sum(per_iteration_counts) / len(per_iteration_counts),
    )
