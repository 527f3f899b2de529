"""Registered-domain extraction against the bundled suffix snapshot."""

import pytest

from consentaudit.errors import UnparsableDomain
from consentaudit.psl import registered_domain, validate_host


@pytest.mark.parametrize(
    "host,expected",
    [
        ("a.com", "a.com"),
        ("sub.a.com", "a.com"),
        ("deep.sub.a.com", "a.com"),
        ("a.com.evil.org", "evil.org"),
        ("shop.example.co.uk", "example.co.uk"),
        ("x.com.au", "x.com.au"),
        ("b.a.ck", "b.a.ck"),      # *.ck wildcard: a.ck is itself a suffix
        ("www.ck", "www.ck"),      # !www.ck exception: suffix is just ck
        ("app.github.io", "app.github.io"),
        ("127.0.0.1", "127.0.0.1"),
    ],
)
def test_registered_domain(host, expected):
    assert registered_domain(host) == expected


def test_bare_suffix_maps_to_itself():
    assert registered_domain("com") == "com"


def test_unknown_tld_uses_default_rule():
    assert registered_domain("foo.bar.unknowntld") == "bar.unknowntld"


@pytest.mark.parametrize("bad", ["", "a..b", "has space.com", "exa$mple.com", "256.1.1.1"])
def test_invalid_hosts_rejected(bad):
    with pytest.raises(UnparsableDomain):
        validate_host(bad)


def test_normalization_before_validation():
    assert validate_host(".Example.COM") == "example.com"
