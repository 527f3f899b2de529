"""Matching of CMP cookie declarations to observed cookies, and consent scope.

Name patterns honor two wildcard conventions used by CMP cookie libraries:
an interior ``x`` or ``#`` stands for exactly one character, while a single
pattern-final ``#`` stands for any non-empty alphanumeric string.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from urllib.parse import urlsplit

from .errors import UnparsableDomain, UnparsableUrl
from .model import CmpDeclaration, CrawlTrace, DeclKey
from .psl import registered_domain


@dataclass(frozen=True)
class NamePattern:
    raw: str
    compiled: re.Pattern

    def matches(self, name: str) -> bool:
        return self.compiled.fullmatch(name) is not None


@lru_cache(maxsize=4096)
def compile_name_pattern(raw: str) -> NamePattern:
    body, final = raw, None
    if raw.endswith("#"):
        body, final = raw[:-1], "[A-Za-z0-9]+"
    parts = []
    for ch in body:
        parts.append("." if ch in ("x", "#") else re.escape(ch))
    if final:
        parts.append(final)
    return NamePattern(raw=raw, compiled=re.compile("".join(parts)))


def match_name(pattern: NamePattern | str, name: str) -> bool:
    """Case-sensitive wildcard match of a declared name against a cookie name."""
    if isinstance(pattern, str):
        pattern = compile_name_pattern(pattern)
    return pattern.matches(name)


def match_domain(declared: str, cookie_domain: str) -> bool:
    """True iff the declared host is a domain suffix of the cookie domain.

    A dotless declared host (CMP libraries list e.g. just "facebook") matches
    any cookie whose registered domain starts with that label.
    """
    if declared == cookie_domain:
        return True
    if "." not in declared:
        try:
            reg = registered_domain(cookie_domain)
        except UnparsableDomain:
            return False
        return reg.split(".")[0] == declared
    return cookie_domain.endswith("." + declared)


def in_scope(consent_cookie_domain: str, page_url: str) -> bool:
    """Whether a page is covered by the consent recorded for this domain."""
    host = urlsplit(page_url).hostname
    if not host:
        raise UnparsableUrl(f"cannot extract a host from {page_url!r}")
    return match_domain(consent_cookie_domain, host.lower())


@dataclass(frozen=True)
class DeclarationMap:
    """Category memberships per observed cookie, by (name, domain)."""

    memberships: dict[DeclKey, frozenset[str]]

    def categories_for(self, name: str, domain: str) -> frozenset[str]:
        return self.memberships.get((name, domain), frozenset())

    def undeclared_candidates(self) -> set[DeclKey]:
        return {k for k, cats in self.memberships.items() if not cats}


def match_declaration(decl: CmpDeclaration, name: str, domain: str) -> bool:
    return match_name(decl.name_pattern, name) and match_domain(decl.host, domain)


def map_declarations(
    trace: CrawlTrace, declarations: tuple[CmpDeclaration, ...] | None = None
) -> DeclarationMap:
    """Match every observed cookie against the CMP cookie library.

    All matching categories are retained: a cookie declared in several
    categories is exactly what the wrong-category check looks for.
    """
    decls = trace.declarations if declarations is None else declarations
    memberships: dict[DeclKey, frozenset[str]] = {}
    for cookie in trace.cookies():
        key = cookie.decl_key
        if key in memberships:
            continue
        memberships[key] = frozenset(
            d.category_id for d in decls if match_declaration(d, *key)
        )
    return DeclarationMap(memberships)
