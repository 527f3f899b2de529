"""Cross-region differential analysis: per-site deltas against a baseline
region and pairwise banner-configuration diffs."""

from __future__ import annotations

from dataclasses import dataclass, field

from .classify import classify_site
from .errors import MissingBaseline, SingleRegion
from .model import VIOLATION_OUTCOMES, BannerConfig, Outcome
from .traceio import MergedAudit

# Parameters whose values are unordered lists; compared as sets of
# pipe-separated items because ordering is a presentation detail.
MULTI_VALUED_PARAMETERS = frozenset({"category_names", "button_labels"})


@dataclass(frozen=True)
class RegionDelta:
    site: str
    region: str
    baseline_region: str
    delta_cookie_count: float
    delta_violation_count: dict[Outcome, float]


@dataclass(frozen=True)
class BannerDiff:
    differing_parameters: tuple[str, ...]
    count: int
    site: str = ""
    region_pair: tuple[str, str] = ("", "")


def group_by_region(
    merged_audits: list[MergedAudit],
) -> dict[str, dict[str, MergedAudit]]:
    grouped: dict[str, dict[str, MergedAudit]] = {}
    for audit in merged_audits:
        grouped.setdefault(audit.region, {})[audit.site] = audit
    return grouped


def _mean_violation_counts(audit: MergedAudit) -> dict[Outcome, float]:
    """Average per-iteration violation counts over classified iterations."""
    per_type: dict[Outcome, list[int]] = {o: [] for o in VIOLATION_OUTCOMES}
    for trace in audit.traces:
        report = classify_site(trace)
        if not report.classified:
            continue
        for outcome in VIOLATION_OUTCOMES:
            per_type[outcome].append(report.counts[outcome])
    return {
        o: (sum(xs) / len(xs) if xs else 0.0) for o, xs in per_type.items()
    }


def site_deltas(
    merged_by_region: dict[str, dict[str, MergedAudit]],
    baseline: str = "EU",
) -> tuple[list[RegionDelta], list[str]]:
    """Per-site mean cookie/violation counts relative to the baseline region.

    Sites absent from the baseline are skipped with a diagnostic.
    """
    if baseline not in merged_by_region:
        raise MissingBaseline(f"baseline region {baseline!r} absent from corpus")
    base_sites = merged_by_region[baseline]
    base_violations = {
        site: _mean_violation_counts(audit) for site, audit in base_sites.items()
    }

    deltas: list[RegionDelta] = []
    diagnostics: list[str] = []
    for region in sorted(merged_by_region):
        for site in sorted(merged_by_region[region]):
            audit = merged_by_region[region][site]
            base = base_sites.get(site)
            if base is None:
                diagnostics.append(
                    f"site {site!r} has no {baseline} baseline; skipped in {region}"
                )
                continue
            own_violations = _mean_violation_counts(audit)
            deltas.append(
                RegionDelta(
                    site=site,
                    region=region,
                    baseline_region=baseline,
                    delta_cookie_count=audit.mean_cookie_count
                    - base.mean_cookie_count,
                    delta_violation_count={
                        o: own_violations[o] - base_violations[site][o]
                        for o in VIOLATION_OUTCOMES
                    },
                )
            )
    return deltas, diagnostics


def _canonical_value(key: str, value: str) -> object:
    if key in MULTI_VALUED_PARAMETERS:
        return frozenset(part.strip() for part in value.split("|") if part.strip())
    return value


def banner_diff(config_a: BannerConfig, config_b: BannerConfig) -> BannerDiff:
    """Parameters present in exactly one config or disagreeing in value."""
    a, b = config_a.as_dict(), config_b.as_dict()
    differing = sorted(
        key
        for key in set(a) | set(b)
        if key not in a
        or key not in b
        or _canonical_value(key, a[key]) != _canonical_value(key, b[key])
    )
    return BannerDiff(differing_parameters=tuple(differing), count=len(differing))


def _banner_for(audit: MergedAudit) -> BannerConfig:
    return audit.traces[-1].banner


@dataclass
class RegionMatrix:
    regions: tuple[str, ...]
    values: list[list[int]] = field(default_factory=list)

    def entry(self, region_a: str, region_b: str) -> int:
        ia = self.regions.index(region_a)
        ib = self.regions.index(region_b)
        return self.values[ia][ib]


def pairwise_region_matrix(merged_audits: list[MergedAudit]) -> RegionMatrix:
    """Symmetric matrix of summed banner-diff counts over shared sites."""
    grouped = group_by_region(merged_audits)
    if len(grouped) < 2:
        raise SingleRegion(f"need >= 2 regions, got {sorted(grouped)}")
    regions = tuple(sorted(grouped))
    matrix = [[0] * len(regions) for _ in regions]
    for i, region_a in enumerate(regions):
        for j in range(i + 1, len(regions)):
            region_b = regions[j]
            shared = set(grouped[region_a]) & set(grouped[region_b])
            total = sum(
                banner_diff(
                    _banner_for(grouped[region_a][site]),
                    _banner_for(grouped[region_b][site]),
                ).count
                for site in shared
            )
            matrix[i][j] = matrix[j][i] = total
    return RegionMatrix(regions=regions, values=matrix)
