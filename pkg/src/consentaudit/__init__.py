"""Offline cookie-consent compliance auditing engine.

Ingests crawl traces, reconstructs consent preferences from CMP state,
classifies every observed cookie against a four-outcome violation model,
detects personal information in cookie values, ranks banner buttons in
captured HTML, and compares consent behavior across regions.
"""

from .classify import (
    CorpusReport,
    RegionRow,
    classify_cookie,
    classify_corpus,
    classify_merged,
    classify_site,
)
from .consent import (
    CategoryChoices,
    ConsentSets,
    ConsentState,
    build_consent_sets,
    decode_cookiebot,
    decode_onetrust,
    decode_snapshot,
    expected_after_reject_all,
    resolve_consent_state,
)
from .matching import (
    DeclarationMap,
    NamePattern,
    compile_name_pattern,
    in_scope,
    map_declarations,
    match_domain,
    match_name,
)
from .model import (
    BannerConfig,
    CategoryDeclaration,
    Choice,
    Cmp,
    CmpDeclaration,
    ConsentStateSnapshot,
    CookieClassification,
    CookieInstance,
    CrawlTrace,
    Outcome,
    Party,
    Phase,
    RequestRecord,
    SiteAuditReport,
)
from .pi import (
    PiCategory,
    PiLabel,
    PurposeDatabase,
    detect_pi,
    entropy_estimate,
    label_corpus,
    summarize_pi,
)
from .psl import derive_party, registered_domain
from .regions import (
    BannerDiff,
    RegionDelta,
    RegionMatrix,
    banner_diff,
    group_by_region,
    pairwise_region_matrix,
    site_deltas,
)
from .stats import TestResult, kruskal_wallis, levene
from .traceio import (
    MergedAudit,
    MergeMode,
    load_trace,
    merge_iterations,
    parse_trace,
    serialize_trace,
)

__version__ = "0.1.0"

__all__ = [
    "BannerConfig",
    "BannerDiff",
    "CategoryChoices",
    "CategoryDeclaration",
    "Choice",
    "Cmp",
    "CmpDeclaration",
    "ConsentSets",
    "ConsentState",
    "ConsentStateSnapshot",
    "CookieClassification",
    "CookieInstance",
    "CorpusReport",
    "CrawlTrace",
    "DeclarationMap",
    "MergeMode",
    "MergedAudit",
    "NamePattern",
    "Outcome",
    "Party",
    "Phase",
    "PiCategory",
    "PiLabel",
    "PurposeDatabase",
    "RegionDelta",
    "RegionMatrix",
    "RegionRow",
    "RequestRecord",
    "SiteAuditReport",
    "TestResult",
    "banner_diff",
    "build_consent_sets",
    "classify_cookie",
    "classify_corpus",
    "classify_merged",
    "classify_site",
    "compile_name_pattern",
    "decode_cookiebot",
    "decode_onetrust",
    "decode_snapshot",
    "derive_party",
    "detect_pi",
    "entropy_estimate",
    "expected_after_reject_all",
    "group_by_region",
    "in_scope",
    "kruskal_wallis",
    "label_corpus",
    "levene",
    "load_trace",
    "map_declarations",
    "match_domain",
    "match_name",
    "merge_iterations",
    "pairwise_region_matrix",
    "parse_trace",
    "registered_domain",
    "resolve_consent_state",
    "serialize_trace",
    "site_deltas",
    "summarize_pi",
]
