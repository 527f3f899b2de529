"""Decoding of CMP consent-state cookies into per-category choices.

OneTrust (and CookiePro, which shares its format) stores choices in the
OptanonConsent cookie as URL-encoded key=value pairs whose "groups" field
lists category:flag pairs. Cookiebot's CookieConsent value carries booleans
for its four fixed categories; Necessary and the Unclassified pseudo-category
cannot be denied and always decode to consent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable
from urllib.parse import parse_qsl, unquote

from .errors import DecodeError, UnknownCategory
from .matching import DeclarationMap
from .model import CategoryDeclaration, Choice, Cmp, ConsentStateSnapshot, DeclKey

CategoryChoices = dict[str, Choice]

COOKIEBOT_NECESSARY = "necessary"
COOKIEBOT_UNCLASSIFIED = "unclassified"
COOKIEBOT_OPTIONAL = ("preferences", "statistics", "marketing")
COOKIEBOT_CATEGORIES = (
    COOKIEBOT_NECESSARY,
    *COOKIEBOT_OPTIONAL,
    COOKIEBOT_UNCLASSIFIED,
)

_FLAGS = {"1": Choice.CONSENT, "0": Choice.NOT_CONSENT}


def _apply_defaults(
    choices: CategoryChoices, categories: Iterable[CategoryDeclaration]
) -> CategoryChoices:
    # Categories missing from the payload fall back to their rejectable flag:
    # always-active implies consent, rejectable implies rejection.
    for cat in categories:
        if cat.category_id not in choices:
            choices[cat.category_id] = (
                Choice.NOT_CONSENT if cat.rejectable else Choice.CONSENT
            )
    return choices


def decode_onetrust(
    raw: str, categories: Iterable[CategoryDeclaration] = ()
) -> CategoryChoices:
    """Decode an OptanonConsent value into per-category choices."""
    fields = dict(parse_qsl(raw, keep_blank_values=True))
    if "groups" not in fields and "%" in raw:
        # tolerate producers that percent-encoded the whole value
        fields = dict(parse_qsl(unquote(raw), keep_blank_values=True))
    if "groups" not in fields:
        raise DecodeError("OptanonConsent value has no groups field", field="groups")
    groups = fields["groups"]
    if not groups:
        raise DecodeError("OptanonConsent groups field is empty", field="groups")
    choices: CategoryChoices = {}
    for pair in groups.split(","):
        category_id, sep, flag = pair.partition(":")
        if not sep or not category_id:
            raise DecodeError(f"malformed groups pair {pair!r}", field="groups")
        if flag not in _FLAGS:
            raise DecodeError(
                f"unknown consent flag {flag!r} for category {category_id!r}",
                field="groups",
            )
        choices[category_id] = _FLAGS[flag]
    return _apply_defaults(choices, categories)


def decode_cookiebot(
    raw: str, categories: Iterable[CategoryDeclaration] = ()
) -> CategoryChoices:
    """Decode a CookieConsent value into the four fixed categories.

    Necessary and Unclassified cannot be denied by users, so they always
    decode to consent regardless of the payload.
    """
    text = unquote(raw)
    choices: CategoryChoices = {
        COOKIEBOT_NECESSARY: Choice.CONSENT,
        COOKIEBOT_UNCLASSIFIED: Choice.CONSENT,
    }
    for field in COOKIEBOT_OPTIONAL:
        match = re.search(
            rf"[\"']?{field}[\"']?\s*[:=]\s*(true|false)", text, re.IGNORECASE
        )
        if match is None:
            raise DecodeError(
                f"CookieConsent value has no {field} field", field=field
            )
        choices[field] = (
            Choice.CONSENT if match.group(1).lower() == "true" else Choice.NOT_CONSENT
        )
    return _apply_defaults(choices, categories)


def decode_snapshot(
    snapshot: ConsentStateSnapshot, categories: Iterable[CategoryDeclaration] = ()
) -> CategoryChoices:
    if snapshot.cmp is Cmp.ONETRUST:
        return decode_onetrust(snapshot.raw_value, categories)
    if snapshot.cmp is Cmp.COOKIEBOT:
        return decode_cookiebot(snapshot.raw_value, categories)
    return {}


def expected_after_reject_all(
    categories: Iterable[CategoryDeclaration],
) -> CategoryChoices:
    """State a compliant CMP must record once all rejectable toggles are off."""
    return {
        cat.category_id: Choice.NOT_CONSENT if cat.rejectable else Choice.CONSENT
        for cat in categories
    }


@dataclass(frozen=True)
class ConsentState:
    """Decoded consent as classification input.

    declarations_absent marks sites the auditor cannot interpret (unknown
    CMP or no recorded state at all): every observed cookie is then an
    undeclared-candidate rather than a misclassification risk.
    """

    choices: CategoryChoices
    declarations_absent: bool
    diagnostics: tuple[str, ...]

    @property
    def recorded(self) -> bool:
        return "consent_not_recorded" not in self.diagnostics


def resolve_consent_state(
    snapshots: tuple[ConsentStateSnapshot, ...],
    categories: tuple[CategoryDeclaration, ...],
    has_declarations: bool,
) -> ConsentState:
    """Decode the latest snapshot and verify the reject-all expectation."""
    snapshot = snapshots[-1] if snapshots else None
    if snapshot is None:
        if has_declarations or categories:
            return ConsentState({}, True, ("consent_not_recorded",))
        return ConsentState({}, True, ("declarations_absent",))
    if snapshot.cmp is Cmp.OTHER:
        return ConsentState({}, True, ("declarations_absent",))
    try:
        choices = decode_snapshot(snapshot, categories)
    except DecodeError as exc:
        return ConsentState({}, True, ("consent_not_recorded", str(exc)))
    expected = expected_after_reject_all(categories)
    mismatched = sorted(
        cat_id
        for cat_id, want in expected.items()
        if choices.get(cat_id) is not want
    )
    if mismatched:
        return ConsentState(
            choices,
            False,
            ("consent_not_recorded", f"choices not enforced for: {', '.join(mismatched)}"),
        )
    return ConsentState(choices, False, ())


@dataclass(frozen=True)
class ConsentSets:
    """Approved/rejected cookie identities (A and R at declaration identity).

    Overlap between the two sets is permitted: it is exactly what the
    wrong-category outcome encodes.
    """

    approved: frozenset[DeclKey]
    rejected: frozenset[DeclKey]


def build_consent_sets(
    choices: CategoryChoices, decl_map: DeclarationMap
) -> ConsentSets:
    """Combine per-category choices with category membership per cookie."""
    approved: set[DeclKey] = set()
    rejected: set[DeclKey] = set()
    for key, category_ids in decl_map.memberships.items():
        for category_id in category_ids:
            choice = choices.get(category_id)
            if choice is None:
                raise UnknownCategory(
                    f"cookie {key[0]!r} is declared in category "
                    f"{category_id!r} which has no recorded choice"
                )
            if choice is Choice.CONSENT:
                approved.add(key)
            else:
                rejected.add(key)
    return ConsentSets(approved=frozenset(approved), rejected=frozenset(rejected))
