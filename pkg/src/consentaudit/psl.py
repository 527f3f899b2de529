"""Registered-domain extraction against a bundled public-suffix snapshot.

The snapshot lives in data/public_suffix_list.dat (publicsuffix.org rule
format: comments, wildcard ``*`` labels, ``!`` exceptions) and is versioned
with the repo so party attribution stays deterministic.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

from .errors import UnparsableDomain
from .model import Party, CookieInstance, normalize_domain

_LABEL_RE = re.compile(r"^[a-z0-9_]([a-z0-9_-]*[a-z0-9_])?$")
_IPV4_RE = re.compile(r"^\d{1,3}(\.\d{1,3}){3}$")


class SuffixRules:
    def __init__(self, rules: set[str], exceptions: set[str]):
        self.rules = rules
        self.exceptions = exceptions

    @staticmethod
    def from_text(text: str) -> "SuffixRules":
        rules: set[str] = set()
        exceptions: set[str] = set()
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("//"):
                continue
            if line.startswith("!"):
                exceptions.add(line[1:])
            else:
                rules.add(line)
        return SuffixRules(rules, exceptions)

    def public_suffix(self, host: str) -> str:
        """Longest matching rule; exceptions win; default rule is ``*``."""
        labels = host.split(".")
        for i in range(len(labels)):
            candidate = ".".join(labels[i:])
            if candidate in self.exceptions:
                return ".".join(labels[i + 1:])
        best = 0  # number of labels claimed by the prevailing rule
        for i in range(len(labels)):
            tail = labels[i:]
            candidate = ".".join(tail)
            wildcard = ".".join(["*"] + tail[1:])
            if candidate in self.rules or wildcard in self.rules:
                best = max(best, len(tail))
        if best == 0:
            best = 1  # implicit "*" rule of the PSL algorithm
        return ".".join(labels[-best:])

    def registered_domain(self, host: str) -> str:
        """Public suffix plus one label; a bare suffix maps to itself."""
        suffix = self.public_suffix(host)
        if host == suffix:
            return host
        extra = host[: -(len(suffix) + 1)].split(".")
        return f"{extra[-1]}.{suffix}"


@lru_cache(maxsize=1)
def default_rules() -> SuffixRules:
    text = (
        resources.files("consentaudit")
        .joinpath("data/public_suffix_list.dat")
        .read_text(encoding="utf-8")
    )
    return SuffixRules.from_text(text)


def validate_host(domain: str) -> str:
    """Normalize and validate a cookie domain; raises UnparsableDomain."""
    host = normalize_domain(domain)
    if not host:
        raise UnparsableDomain("empty cookie domain")
    if _IPV4_RE.match(host):
        if all(0 <= int(part) <= 255 for part in host.split(".")):
            return host
        raise UnparsableDomain(f"invalid IPv4 literal {domain!r}")
    if len(host) > 253 or any(not _LABEL_RE.match(lbl) for lbl in host.split(".")):
        raise UnparsableDomain(f"{domain!r} is not a valid host")
    return host


def registered_domain(domain: str, rules: SuffixRules | None = None) -> str:
    host = validate_host(domain)
    if _IPV4_RE.match(host):
        return host  # IP literals have no suffix structure
    return (rules or default_rules()).registered_domain(host)


def derive_party(
    cookie: CookieInstance | str, site: str, rules: SuffixRules | None = None
) -> Party:
    """First party iff the cookie domain's registered domain equals the site."""
    domain = cookie.domain if isinstance(cookie, CookieInstance) else cookie
    if registered_domain(domain, rules) == normalize_domain(site):
        return Party.FIRST_PARTY
    return Party.THIRD_PARTY
