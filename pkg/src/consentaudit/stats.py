"""Levene's test and the Kruskal-Wallis H test for cross-region comparisons.

Levene centers on the group mean by default (the classic form); pass
center="median" for the Brown-Forsythe variant. Kruskal-Wallis uses
mid-ranks with the standard tie correction; a corpus where every value is
identical reports H = 0, p = 1 rather than failing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InsufficientData
from .special import chi2_sf, f_sf

Sample = Sequence[float]


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    df: str
    n_groups: int
    n_total: int


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


def _median(xs: Sequence[float]) -> float:
    ordered = sorted(xs)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def levene(groups: list[Sample], center: str = "mean") -> TestResult:
    """Levene's W with an F(k-1, N-k) p-value."""
    if center not in ("mean", "median"):
        raise ValueError(f"unknown centering {center!r}")
    if len(groups) < 2:
        raise InsufficientData("levene needs at least 2 groups")
    if any(len(g) < 2 for g in groups):
        raise InsufficientData("levene needs at least 2 observations per group")

    k = len(groups)
    n_total = sum(len(g) for g in groups)
    center_fn = _mean if center == "mean" else _median
    z_groups = [[abs(x - center_fn(g)) for x in g] for g in groups]
    z_bars = [_mean(z) for z in z_groups]
    grand = sum(sum(z) for z in z_groups) / n_total

    between = sum(len(z) * (zb - grand) ** 2 for z, zb in zip(z_groups, z_bars))
    within = sum(
        (zij - zb) ** 2 for z, zb in zip(z_groups, z_bars) for zij in z
    )
    dfn, dfd = k - 1, n_total - k
    if within == 0.0:
        # no spread in the absolute deviations at all
        statistic = 0.0 if between == 0.0 else float("inf")
    else:
        statistic = (dfd / dfn) * (between / within)
    p_value = f_sf(statistic, dfn, dfd)
    return TestResult(
        statistic=statistic,
        p_value=p_value,
        df=f"F({dfn}, {dfd})",
        n_groups=k,
        n_total=n_total,
    )


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        midrank = (i + j) / 2.0 + 1.0
        for idx in order[i : j + 1]:
            ranks[idx] = midrank
        i = j + 1
    return ranks


def kruskal_wallis(groups: list[Sample]) -> TestResult:
    """Kruskal-Wallis H with tie correction; chi-square(k-1) p-value."""
    if len(groups) < 2:
        raise InsufficientData("kruskal_wallis needs at least 2 groups")
    if any(len(g) == 0 for g in groups):
        raise InsufficientData("kruskal_wallis got an empty group")
    n_total = sum(len(g) for g in groups)
    if n_total < 3:
        raise InsufficientData("kruskal_wallis needs at least 3 observations")

    k = len(groups)
    pooled: list[float] = [x for g in groups for x in g]
    ranks = _midranks(pooled)

    h = 0.0
    start = 0
    for g in groups:
        group_ranks = ranks[start : start + len(g)]
        start += len(g)
        h += sum(group_ranks) ** 2 / len(g)
    h = 12.0 / (n_total * (n_total + 1)) * h - 3.0 * (n_total + 1)

    # tie correction: divide by 1 - sum(t^3 - t) / (N^3 - N)
    tie_sizes: dict[float, int] = {}
    for x in pooled:
        tie_sizes[x] = tie_sizes.get(x, 0) + 1
    correction = 1.0 - sum(t**3 - t for t in tie_sizes.values()) / (
        n_total**3 - n_total
    )
    if correction == 0.0:
        # every observation identical
        statistic = 0.0
        p_value = 1.0
    else:
        statistic = h / correction
        if abs(statistic) < 1e-12:
            statistic = 0.0
        p_value = chi2_sf(statistic, k - 1)
    return TestResult(
        statistic=statistic,
        p_value=p_value,
        df=f"chi2({k - 1})",
        n_groups=k,
        n_total=n_total,
    )
