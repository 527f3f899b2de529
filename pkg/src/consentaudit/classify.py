"""Classification of observed cookies against decoded consent preferences.

Each distinct cookie key lands in exactly one of four outcomes, a function
of its membership in the approved and rejected sets:

    approved only          -> compliant
    rejected only          -> ignored_rejection
    neither                -> undeclared
    both                   -> wrong_category
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .consent import ConsentSets, build_consent_sets, resolve_consent_state
from .errors import UnparsableDomain, UnparsableUrl
from .matching import DeclarationMap, in_scope, match_declaration
from .model import (
    VIOLATION_OUTCOMES,
    Choice,
    CookieClassification,
    CookieInstance,
    CookieKey,
    CrawlTrace,
    Outcome,
    Party,
    Phase,
    SiteAuditReport,
)
from .psl import derive_party
from .traceio import MergedAudit

# Phases whose transmissions count toward violations; cookies seen only
# before consent was exercised are reported separately as informational.
COUNTED_PHASES = (Phase.POST_REJECT, Phase.SUBPAGE_VISIT)


def classify_cookie(cookie_key: CookieKey, sets: ConsentSets) -> Outcome:
    """Truth table over (approved, rejected) membership. Total."""
    decl_key = (cookie_key[0], cookie_key[1])
    in_approved = decl_key in sets.approved
    in_rejected = decl_key in sets.rejected
    if in_approved and in_rejected:
        return Outcome.WRONG_CATEGORY
    if in_approved:
        return Outcome.COMPLIANT
    if in_rejected:
        return Outcome.IGNORED_REJECTION
    return Outcome.UNDECLARED


def _scope_filtered(
    trace: CrawlTrace, consent_domain: str, diagnostics: list[str]
) -> tuple[dict[CookieKey, list[CookieInstance]], int]:
    """Group cookies by key, dropping requests whose page context is out of
    the consent scope. Returns (in-scope instances, fully-excluded key count)."""
    in_scope_instances: dict[CookieKey, list[CookieInstance]] = {}
    excluded_keys: set[CookieKey] = set()
    for request in trace.requests:
        frame = request.initiator_frame
        if frame:
            try:
                covered = in_scope(consent_domain, frame)
            except UnparsableUrl:
                diagnostics.append(f"unparsable page context {frame!r}; excluded")
                covered = False
            if not covered:
                excluded_keys.update(c.key for c in request.attached_cookies)
                continue
        for cookie in request.attached_cookies:
            in_scope_instances.setdefault(cookie.key, []).append(cookie)
    fully_excluded = len(excluded_keys - set(in_scope_instances))
    return in_scope_instances, fully_excluded


def _classify_instances(
    report: SiteAuditReport,
    instances: dict[CookieKey, list[CookieInstance]],
    decl_map: DeclarationMap,
    sets: ConsentSets,
    choices: dict[str, Choice],
) -> None:
    counts = {outcome: 0 for outcome in Outcome}
    third_party = {outcome: 0 for outcome in Outcome}
    for key in sorted(instances):
        occurrences = instances[key]
        phases = {c.phase for c in occurrences}
        if not phases.intersection(COUNTED_PHASES):
            report.pre_consent_only += 1
            continue
        try:
            party = derive_party(key[1], report.site)
        except UnparsableDomain as exc:
            report.diagnostics.append(f"skipped cookie {key[0]!r}: {exc}")
            continue
        outcome = classify_cookie(key, sets)
        first = min(occurrences, key=lambda c: c.observed_at)
        report.cookie_values[key] = first.value
        evidence = tuple(
            (category_id, choices[category_id])
            for category_id in sorted(decl_map.categories_for(key[0], key[1]))
        )
        report.classifications.append(
            CookieClassification(
                cookie_key=key,
                outcome=outcome,
                party=party,
                evidence=evidence,
                phase_first_seen=first.phase,
            )
        )
        counts[outcome] += 1
        if party is Party.THIRD_PARTY:
            third_party[outcome] += 1
    report.counts = counts
    report.third_party_counts = third_party
    report.has_violation = {o: counts[o] > 0 for o in VIOLATION_OUTCOMES}
    report.compliant_site = not any(report.has_violation.values())


def _classify_common(
    site: str,
    region: str,
    instances_by_trace: list[dict[CookieKey, list[CookieInstance]]],
    declarations,
    categories,
    snapshots,
) -> SiteAuditReport:
    report = SiteAuditReport(site=site, region=region)
    report.counts = {outcome: 0 for outcome in Outcome}
    report.third_party_counts = {outcome: 0 for outcome in Outcome}
    report.has_violation = {o: False for o in VIOLATION_OUTCOMES}

    state = resolve_consent_state(snapshots, categories, bool(declarations))
    report.diagnostics.extend(state.diagnostics)
    if not state.recorded:
        return report  # classifies nothing; the diagnostic travels with it

    merged_instances: dict[CookieKey, list[CookieInstance]] = {}
    for per_trace in instances_by_trace:
        for key, occurrences in per_trace.items():
            merged_instances.setdefault(key, []).extend(occurrences)

    if state.declarations_absent:
        decl_map = DeclarationMap({(k[0], k[1]): frozenset() for k in merged_instances})
        purposes: dict = {}
    else:
        all_cookies = [c for occ in merged_instances.values() for c in occ]
        decl_map, purposes = _map_instances(all_cookies, declarations)
    sets = build_consent_sets(state.choices, decl_map)
    _classify_instances(report, merged_instances, decl_map, sets, state.choices)
    for key in report.cookie_values:
        report.cookie_purposes[key] = purposes.get((key[0], key[1]), "")
    return report


def _map_instances(cookies, declarations):
    memberships = {}
    purposes = {}
    for cookie in cookies:
        key = cookie.decl_key
        if key not in memberships:
            matched = [d for d in declarations if match_declaration(d, *key)]
            memberships[key] = frozenset(d.category_id for d in matched)
            purposes[key] = " ".join(
                sorted({d.purpose_text for d in matched if d.purpose_text})
            )
    return DeclarationMap(memberships), purposes


def classify_site(trace: CrawlTrace) -> SiteAuditReport:
    """Classify one trace; request order never affects any count."""
    diagnostics: list[str] = []
    instances, fully_excluded = _scope_filtered(
        trace, trace.consent_domain(), diagnostics
    )
    report = _classify_common(
        trace.site,
        trace.region,
        [instances],
        trace.declarations,
        trace.categories,
        trace.snapshots,
    )
    report.out_of_scope = fully_excluded
    report.diagnostics.extend(diagnostics)
    return report


def classify_merged(merged: MergedAudit) -> SiteAuditReport:
    """Classify the union cookie set of repeated measurements."""
    diagnostics: list[str] = []
    snapshots = tuple(
        sorted(
            (s for t in merged.traces for s in t.snapshots),
            key=lambda s: s.captured_at,
        )
    )
    consent_domain = (
        snapshots[-1].consent_cookie_domain if snapshots else merged.site
    )
    views = []
    excluded = 0
    for trace in merged.traces:
        instances, fully_excluded = _scope_filtered(trace, consent_domain, diagnostics)
        views.append(instances)
        excluded += fully_excluded
    report = _classify_common(
        merged.site,
        merged.region,
        views,
        merged.declarations(),
        merged.categories(),
        snapshots,
    )
    report.out_of_scope = excluded
    report.diagnostics.extend(diagnostics)
    return report


@dataclass
class RegionRow:
    """One region's aggregate, shaped like the per-region violation table."""

    region: str
    sites_total: int = 0
    sites_classified: int = 0
    violation_cookies: dict[Outcome, int] = field(default_factory=dict)
    pct_websites: dict[Outcome, float] = field(default_factory=dict)
    pct_any_violation: float = 0.0
    pct_compliant: float = 0.0
    mean_cookies_per_site: float = 0.0


@dataclass
class CorpusReport:
    rows: dict[str, RegionRow]
    site_reports: dict[tuple[str, str], SiteAuditReport]


IncludeFn = Callable[[SiteAuditReport, CookieClassification], bool]


def classify_corpus(
    merged_audits: list[MergedAudit], include: IncludeFn | None = None
) -> CorpusReport:
    """Aggregate per-region violation counts and website percentages.

    ``include`` optionally restricts which classified cookies are reported
    (the personal-information filter); it can only shrink counts.
    """
    site_reports: dict[tuple[str, str], SiteAuditReport] = {}
    by_region: dict[str, list[tuple[MergedAudit, SiteAuditReport]]] = {}
    for merged in merged_audits:
        report = classify_merged(merged)
        site_reports[(merged.site, merged.region)] = report
        by_region.setdefault(merged.region, []).append((merged, report))

    rows: dict[str, RegionRow] = {}
    for region in sorted(by_region):
        entries = by_region[region]
        row = RegionRow(region=region, sites_total=len(entries))
        row.violation_cookies = {o: 0 for o in VIOLATION_OUTCOMES}
        sites_with = {o: 0 for o in VIOLATION_OUTCOMES}
        any_violation = 0
        compliant = 0
        mean_counts = []
        for merged, report in entries:
            mean_counts.append(merged.mean_cookie_count)
            if not report.classified:
                continue
            row.sites_classified += 1
            included = [
                c
                for c in report.classifications
                if include is None or include(report, c)
            ]
            site_has = {o: False for o in VIOLATION_OUTCOMES}
            for classification in included:
                if classification.outcome in VIOLATION_OUTCOMES:
                    row.violation_cookies[classification.outcome] += 1
                    site_has[classification.outcome] = True
            for outcome, hit in site_has.items():
                if hit:
                    sites_with[outcome] += 1
            if any(site_has.values()):
                any_violation += 1
            else:
                compliant += 1
        denom = row.sites_classified or 1
        row.pct_websites = {
            o: 100.0 * sites_with[o] / denom for o in VIOLATION_OUTCOMES
        }
        row.pct_any_violation = 100.0 * any_violation / denom
        row.pct_compliant = 100.0 * compliant / denom
        row.mean_cookies_per_site = (
            sum(mean_counts) / len(mean_counts) if mean_counts else 0.0
        )
        rows[region] = row
    return CorpusReport(rows=rows, site_reports=site_reports)
