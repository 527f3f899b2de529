"""Domain types for crawl traces and audit results.

Everything here is an immutable value object. A parsed trace is safe to
share across threads; all downstream stages are pure functions over it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import InvariantViolation


class Phase(Enum):
    """When in the crawl a cookie transmission was observed."""

    PRE_CONSENT = "pre_consent"
    POST_REJECT = "post_reject"
    SUBPAGE_VISIT = "subpage_visit"


class Party(Enum):
    FIRST_PARTY = "first_party"
    THIRD_PARTY = "third_party"


class Cmp(Enum):
    ONETRUST = "onetrust"
    COOKIEBOT = "cookiebot"
    OTHER = "other"


class Choice(Enum):
    CONSENT = "consent"
    NOT_CONSENT = "not_consent"


class Outcome(Enum):
    COMPLIANT = "compliant"
    IGNORED_REJECTION = "ignored_rejection"
    UNDECLARED = "undeclared"
    WRONG_CATEGORY = "wrong_category"


VIOLATION_OUTCOMES = (
    Outcome.IGNORED_REJECTION,
    Outcome.UNDECLARED,
    Outcome.WRONG_CATEGORY,
)

# Cookie identity per the cookie storage model: (name, domain, path).
CookieKey = tuple[str, str, str]

# Declaration-level identity: declarations carry no path.
DeclKey = tuple[str, str]


def normalize_domain(domain: str) -> str:
    """Lowercase and strip the leading dot, as browsers do when storing."""
    return domain.lstrip(".").lower()


@dataclass(frozen=True)
class CookieInstance:
    """One observed transmission of a cookie on a request."""

    name: str
    domain: str
    path: str
    value: str
    observed_at: int  # milliseconds since epoch
    request_id: str
    phase: Phase

    def __post_init__(self):
        if not self.name:
            raise InvariantViolation("cookie name must be non-empty")
        if self.domain != normalize_domain(self.domain):
            raise InvariantViolation(
                f"cookie domain {self.domain!r} is not normalized "
                "(lowercase, no leading dot)"
            )

    @property
    def key(self) -> CookieKey:
        return (self.name, self.domain, self.path)

    @property
    def decl_key(self) -> DeclKey:
        return (self.name, self.domain)


@dataclass(frozen=True)
class RequestRecord:
    """One HTTP(S) request with the cookies actually attached to it."""

    request_id: str
    url: str
    method: str
    attached_cookies: tuple[CookieInstance, ...]
    initiator_frame: str  # top-level page URL at request time, or ""

    def __post_init__(self):
        for c in self.attached_cookies:
            if c.request_id != self.request_id:
                raise InvariantViolation(
                    f"cookie {c.name!r} carries request_id {c.request_id!r} "
                    f"but is attached to request {self.request_id!r}"
                )


@dataclass(frozen=True)
class CmpDeclaration:
    """A CMP cookie-library entry."""

    name_pattern: str
    host: str
    category_id: str
    purpose_text: str = ""
    declared_duration: str = ""

    def __post_init__(self):
        if not self.name_pattern:
            raise InvariantViolation("declaration name_pattern must be non-empty")


@dataclass(frozen=True)
class CategoryDeclaration:
    """A consent category plus the choice recorded after the exerciser acted."""

    category_id: str
    label: str
    rejectable: bool
    consent_choice: Choice

    def __post_init__(self):
        if not self.rejectable and self.consent_choice is not Choice.CONSENT:
            raise InvariantViolation(
                f"category {self.category_id!r} is always-active "
                "(rejectable=false) but records consent_choice=not_consent"
            )


@dataclass(frozen=True)
class ConsentStateSnapshot:
    """Raw consent-cookie value captured at a moment in the crawl."""

    cmp: Cmp
    raw_value: str
    consent_cookie_domain: str
    captured_at: int
    page_url: str

    def __post_init__(self):
        if self.cmp is not Cmp.OTHER and not self.raw_value:
            raise InvariantViolation(
                f"snapshot for cmp {self.cmp.value} has empty raw_value"
            )


@dataclass(frozen=True)
class BannerConfig:
    """Canonicalized banner parameters (trimmed values, lowercase keys)."""

    parameters: tuple[tuple[str, str], ...] = ()

    @staticmethod
    def from_mapping(params: dict[str, str]) -> "BannerConfig":
        canon: dict[str, str] = {}
        for key, value in params.items():
            k = key.strip().lower()
            v = " ".join(str(value).split())
            if k in canon and canon[k] != v:
                raise InvariantViolation(f"banner parameter {k!r} given twice")
            canon[k] = v
        return BannerConfig(tuple(sorted(canon.items())))

    def as_dict(self) -> dict[str, str]:
        return dict(self.parameters)


@dataclass(frozen=True)
class CrawlTrace:
    """The full record of one site visit in one region."""

    site: str
    region: str
    iteration: int
    requests: tuple[RequestRecord, ...]
    declarations: tuple[CmpDeclaration, ...]
    categories: tuple[CategoryDeclaration, ...]
    snapshots: tuple[ConsentStateSnapshot, ...]
    banner: BannerConfig
    subpages_visited: tuple[str, ...]

    def __post_init__(self):
        if self.iteration < 1:
            raise InvariantViolation("iteration must be >= 1")
        known = {c.category_id for c in self.categories}
        for d in self.declarations:
            if d.category_id not in known:
                raise InvariantViolation(
                    f"declaration {d.name_pattern!r} references unknown "
                    f"category {d.category_id!r}"
                )

    def cookies(self) -> list[CookieInstance]:
        """All observed cookie instances, in request order."""
        return [c for r in self.requests for c in r.attached_cookies]

    def consent_domain(self) -> str:
        """Domain defining the consent scope (consent cookie, else site)."""
        if self.snapshots:
            return self.snapshots[-1].consent_cookie_domain
        return self.site


@dataclass(frozen=True)
class CookieClassification:
    """Final outcome for one distinct cookie key."""

    cookie_key: CookieKey
    outcome: Outcome
    party: Party
    evidence: tuple[tuple[str, Choice], ...]
    phase_first_seen: Phase


@dataclass
class SiteAuditReport:
    """Per-(site, region) classification summary."""

    site: str
    region: str
    classifications: list[CookieClassification] = field(default_factory=list)
    cookie_values: dict[CookieKey, str] = field(default_factory=dict)
    cookie_purposes: dict[CookieKey, str] = field(default_factory=dict)
    counts: dict[Outcome, int] = field(default_factory=dict)
    third_party_counts: dict[Outcome, int] = field(default_factory=dict)
    has_violation: dict[Outcome, bool] = field(default_factory=dict)
    compliant_site: bool = True
    pre_consent_only: int = 0
    out_of_scope: int = 0
    diagnostics: list[str] = field(default_factory=list)

    @property
    def classified(self) -> bool:
        return "consent_not_recorded" not in self.diagnostics
