"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the lines as they go.
Every oracle here is independent of the code path it checks: membership
formulas evaluated directly, a character-walking wildcard matcher, label
slicing for domain suffixes, rational/mpmath arithmetic for statistics.
"""

import math
import random
import time
from fractions import Fraction

import mpmath as mp

from consentaudit.banner import (
    FEATURE_DIM,
    cross_validate,
    featurize,
    load_labeled_pages,
    recall_at_k_from_rankings,
    train,
    training_rows,
)
from consentaudit.classify import classify_cookie, classify_corpus
from consentaudit.consent import ConsentSets, decode_cookiebot, decode_onetrust
from consentaudit.matching import match_domain, match_name
from consentaudit.model import Choice, Outcome
from consentaudit.regions import (
    group_by_region,
    pairwise_region_matrix,
    site_deltas,
)
from consentaudit.stats import kruskal_wallis, levene
from consentaudit.traceio import MergeMode, load_trace, merge_iterations

from .helpers import build_trace, cookie as cookie_record, request
from .helpers import simple_onetrust_records
from .test_consent import serialize_onetrust
from .test_matching import brute_force_name_match

mp.mp.dps = 30


def _report(name):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            print(f"\n[ACCEPTANCE] {'FAIL' if exc_type else 'PASS'}: {name}")
            return False

    return _Ctx()


# --- criterion: Table-3 oracle equivalence ----------------------------------


def test_truth_table_oracle_equivalence_10k():
    with _report("Table-3 oracle equivalence (10,000 assignments, 0 mismatches, <5s)"):
        rng = random.Random(1793)
        started = time.monotonic()
        mismatches = 0
        for _ in range(10_000):
            key = (f"c{rng.randrange(50)}", f"d{rng.randrange(20)}.com", "/")
            decl_key = (key[0], key[1])
            in_approved = rng.random() < 0.5
            in_rejected = rng.random() < 0.5
            sets = ConsentSets(
                approved=frozenset([decl_key] if in_approved else []),
                rejected=frozenset([decl_key] if in_rejected else []),
            )
            got = classify_cookie(key, sets)
            # direct evaluation of the four set-membership formulas
            if in_approved and not in_rejected:
                want = Outcome.COMPLIANT
            elif not in_approved and in_rejected:
                want = Outcome.IGNORED_REJECTION
            elif not in_approved and not in_rejected:
                want = Outcome.UNDECLARED
            else:
                want = Outcome.WRONG_CATEGORY
            mismatches += got is not want
        elapsed = time.monotonic() - started
        assert mismatches == 0
        assert elapsed < 5.0, f"took {elapsed:.2f}s"


# --- criterion: seeded-violation corpus --------------------------------------


def test_seeded_corpus_exact_precision_and_recall(corpus_dir, manifest):
    with _report("Seeded corpus: 100% precision and recall against the manifest"):
        traces = {}
        for path in sorted(corpus_dir.glob("*.jsonl")):
            trace = load_trace(path)
            traces.setdefault((trace.site, trace.region), []).append(trace)
        assert len({site for site, _ in traces}) >= 12

        outcomes_seen = set()
        cmps_seen = set()
        parties_seen = set()
        saw_pre_consent = saw_out_of_scope = False

        for entry in manifest["sites"]:
            key = (entry["site"], entry["region"])
            merged = merge_iterations(traces[key], MergeMode.UNION)
            report = classify_corpus([merged]).site_reports[key]
            cmps_seen.update(s.cmp.value for t in merged.traces for s in t.snapshots)

            assert report.classified == entry["classified"], key
            if not entry["classified"]:
                assert report.classifications == []
                continue

            got = {
                "|".join(c.cookie_key): c.outcome.value
                for c in report.classifications
            }
            want = {k: v["outcome"] for k, v in entry["expected"].items()}
            # exact match <=> no false positives and no false negatives
            assert got == want, key
            got_party = {
                "|".join(c.cookie_key): c.party.value for c in report.classifications
            }
            assert got_party == {
                k: v["party"] for k, v in entry["expected"].items()
            }, key
            assert report.pre_consent_only == len(entry["pre_consent_only"]), key
            assert report.out_of_scope == len(entry["out_of_scope"]), key
            assert report.compliant_site == entry["compliant_site"], key

            outcomes_seen.update(want.values())
            parties_seen.update(got_party.values())
            saw_pre_consent |= bool(entry["pre_consent_only"])
            saw_out_of_scope |= bool(entry["out_of_scope"])

        assert outcomes_seen == {
            "compliant",
            "ignored_rejection",
            "undeclared",
            "wrong_category",
        }
        assert {"onetrust", "cookiebot"} <= cmps_seen
        assert parties_seen == {"first_party", "third_party"}
        assert saw_pre_consent and saw_out_of_scope


# --- criterion: matching rules ------------------------------------------------


def test_matching_rules_against_brute_force():
    with _report("Matching rules: worked example + 200 name / 1,000 domain cases"):
        assert match_name("_gatxxx", "_gat123") is True

        rng = random.Random(42)
        name_alphabet = "ab_x#123"
        mismatches = 0
        for _ in range(200):
            pattern = "".join(
                rng.choice(name_alphabet) for _ in range(rng.randint(1, 8))
            )
            name = "".join(
                rng.choice("ab_x123-") for _ in range(rng.randint(1, 10))
            )
            if match_name(pattern, name) != brute_force_name_match(pattern, name):
                mismatches += 1
        assert mismatches == 0

        labels = ["a", "b", "c", "shop", "www", "example", "co"]
        tlds = ["com", "org", "net", "co.uk"]

        def random_host(min_labels=2):
            body = [rng.choice(labels) for _ in range(rng.randint(min_labels - 1, 3))]
            return ".".join(body + [rng.choice(tlds)])

        for _ in range(1_000):
            declared = random_host()
            cookie_domain = (
                declared if rng.random() < 0.2 else random_host()
            )
            if rng.random() < 0.3:
                cookie_domain = f"{rng.choice(labels)}.{declared}"
            got = match_domain(declared, cookie_domain)
            # independent route: compare label lists from the right
            da, db = declared.split("."), cookie_domain.split(".")
            want = len(db) >= len(da) and db[-len(da):] == da
            assert got == want, (declared, cookie_domain)


# --- criterion: decoder round trips -------------------------------------------


def test_decoder_round_trips_and_cookiebot_floor():
    with _report("Decoders: 1,000 OneTrust round trips; Cookiebot never denies "
                 "necessary/unclassified over 1,000 payloads"):
        rng = random.Random(7)
        ids = [f"C{j:04d}" for j in range(1, 40)] + ["BG42", "STACK1"]
        for _ in range(1_000):
            chosen = rng.sample(ids, rng.randint(1, 8))
            choices = {
                cid: rng.choice((Choice.CONSENT, Choice.NOT_CONSENT))
                for cid in chosen
            }
            raw = serialize_onetrust(choices, url_encode=rng.random() < 0.5)
            assert decode_onetrust(raw) == choices

        for _ in range(1_000):
            quote_style = rng.choice(["", "'", '"'])
            fields = {
                "preferences": rng.random() < 0.5,
                "statistics": rng.random() < 0.5,
                "marketing": rng.random() < 0.5,
            }
            body = ",".join(
                f"{quote_style}{name}{quote_style}:{str(value).lower()}"
                for name, value in fields.items()
            )
            extras = rng.choice(
                ["", "stamp:'x1Y/2+z=',", "ver:3,", "utc:1700000000000,"]
            )
            payload = "{" + extras + "necessary:true," + body + ",method:'explicit'}"
            decoded = decode_cookiebot(payload)
            assert decoded["necessary"] is Choice.CONSENT
            assert decoded["unclassified"] is Choice.CONSENT


# --- criterion: statistics ----------------------------------------------------


def _brute_levene(groups):
    """Direct formula evaluation: W and its F tail via mpmath."""
    k = len(groups)
    n = sum(len(g) for g in groups)
    z = [[abs(x - sum(g) / len(g)) for x in g] for g in groups]
    zbar = [sum(zi) / len(zi) for zi in z]
    grand = sum(sum(zi) for zi in z) / n
    between = sum(len(zi) * (zb - grand) ** 2 for zi, zb in zip(z, zbar))
    within = sum((v - zb) ** 2 for zi, zb in zip(z, zbar) for v in zi)
    dfn, dfd = k - 1, n - k
    if within == 0:
        return (0.0 if between == 0 else math.inf), (1.0 if between == 0 else 0.0)
    w = (dfd / dfn) * (between / within)
    x = Fraction(dfd) / (Fraction(dfd) + Fraction(dfn) * Fraction(w))
    p = mp.betainc(
        mp.mpf(dfd) / 2, mp.mpf(dfn) / 2, 0, mp.mpf(x.numerator) / x.denominator,
        regularized=True,
    )
    return w, float(p)


def _brute_kruskal(groups):
    """Count-based midranks (no sorting) and a chi-square tail via mpmath."""
    pooled = [x for g in groups for x in g]
    n = len(pooled)

    def rank_of(value):
        less = sum(1 for y in pooled if y < value)
        equal = sum(1 for y in pooled if y == value)
        return less + (equal + 1) / 2.0

    h = 0.0
    for g in groups:
        h += sum(rank_of(x) for x in g) ** 2 / len(g)
    h = 12.0 / (n * (n + 1)) * h - 3 * (n + 1)
    ties = {}
    for x in pooled:
        ties[x] = ties.get(x, 0) + 1
    denom = 1 - sum(t**3 - t for t in ties.values()) / (n**3 - n)
    if denom == 0:
        return 0.0, 1.0
    h /= denom
    if abs(h) < 1e-12:
        h = 0.0
    df = len(groups) - 1
    p = mp.gammainc(mp.mpf(df) / 2, mp.mpf(h) / 2, mp.inf, regularized=True)
    return h, float(p)


def test_statistics_against_brute_force_evaluation():
    with _report("Statistics: 50 random datasets, statistic<=1e-9, p<=1e-8; "
                 "trivial cases exact"):
        rng = random.Random(54)
        for trial in range(50):
            k = rng.randint(2, 4)
            groups = []
            for _ in range(k):
                size = rng.randint(2, 7)
                if rng.random() < 0.4:  # integer-valued groups produce ties
                    groups.append([float(rng.randint(0, 8)) for _ in range(size)])
                else:
                    groups.append(
                        [round(rng.uniform(-20, 20), 3) for _ in range(size)]
                    )
            assert sum(len(g) for g in groups) <= 30

            want_w, want_wp = _brute_levene(groups)
            got = levene(groups)
            if math.isinf(want_w):
                assert math.isinf(got.statistic)
            else:
                assert abs(got.statistic - want_w) <= 1e-9, (trial, groups)
            assert abs(got.p_value - want_wp) <= 1e-8, (trial, groups)

            want_h, want_hp = _brute_kruskal(groups)
            got_h = kruskal_wallis(groups)
            assert abs(got_h.statistic - want_h) <= 1e-9, (trial, groups)
            assert abs(got_h.p_value - want_hp) <= 1e-8, (trial, groups)

        identical = [[4.0, 5.0, 6.0], [4.0, 5.0, 6.0]]
        assert levene(identical).statistic == 0.0
        assert levene(identical).p_value == 1.0
        assert kruskal_wallis([[3.0, 3.0], [3.0, 3.0, 3.0]]).statistic == 0.0


# --- criterion: button detector -------------------------------------------------


def test_button_detector_dimensions_monotonicity_determinism(labeled_pages_path):
    with _report("Button detector: 17 dims on 50 pages; monotone recall@k over "
                 "1,000 rankings; deterministic training"):
        with open(labeled_pages_path, "rb") as fh:
            pages = load_labeled_pages(fh)
        assert len(pages) >= 50
        for page in pages[:50]:
            for candidate in page.candidates():
                assert len(featurize(candidate)) == FEATURE_DIM

        rng = random.Random(99)
        for _ in range(1_000):
            n_pages = rng.randint(1, 5)
            rankings = []
            for p in range(n_pages):
                n = rng.randint(1, 12)
                order = [f"l{p}_{i}" for i in range(n)]
                rng.shuffle(order)
                gold = set(rng.sample(order, rng.randint(1, min(2, n))))
                rankings.append((order, gold))
            series = [recall_at_k_from_rankings(rankings, k) for k in range(1, 14)]
            assert all(a <= b for a, b in zip(series, series[1:]))

        rows = training_rows(pages[:12])
        first = train(rows, trees=10, seed=2024)
        second = train(rows, trees=10, seed=2024)
        assert first.content_hash() == second.content_hash()


def test_button_detector_recall_thresholds(labeled_pages_path):
    with _report("Button detector: recall@1 >= 0.70 and recall@5 >= 0.85 on the "
                 "bundled labeled set (10-fold CV)"):
        with open(labeled_pages_path, "rb") as fh:
            pages = load_labeled_pages(fh)
        assert len(pages) >= 60
        assert sum(len(p.gold_locators) for p in pages) >= 80
        _, means = cross_validate(pages, folds=10, seed=1793, ks=(1, 5))
        print(f"\n  recall@1={means[1]:.4f} recall@5={means[5]:.4f}", end="")
        assert means[1] >= 0.70
        assert means[5] >= 0.85


# --- criterion: determinism of cmd_audit ----------------------------------------


def test_cmd_audit_three_runs_byte_identical(corpus_dir, tmp_path):
    with _report("cmd_audit: byte-identical outputs across 3 runs, <60s total"):
        from consentaudit.cli import main

        started = time.monotonic()
        digests = []
        for run in range(3):
            out = tmp_path / f"run{run}"
            assert (
                main(["audit", "--trace-dir", str(corpus_dir), "--output-dir", str(out)])
                == 0
            )
            digests.append(
                {p.name: p.read_bytes() for p in sorted(out.iterdir())}
            )
        elapsed = time.monotonic() - started
        assert digests[0] == digests[1] == digests[2]
        assert elapsed < 60.0, f"took {elapsed:.1f}s"


# --- criterion: region analysis --------------------------------------------------


def _random_corpus(rng):
    regions = rng.sample(["EU", "US", "CA", "AU", "SG"], rng.randint(2, 4))
    sites = [f"s{j}.com" for j in range(rng.randint(1, 4))]
    audits = []
    for region in regions:
        for site in sites:
            if rng.random() < 0.75:
                records = simple_onetrust_records(site, region) + [
                    request("r1", f"https://{site}/"),
                    cookie_record("r1", "x", site),
                ]
                if rng.random() < 0.8:
                    records.append(
                        {
                            "kind": "banner",
                            "parameters": {
                                f"p{i}": rng.choice("abc")
                                for i in range(rng.randint(0, 5))
                            },
                        }
                    )
                audits.append(
                    merge_iterations([build_trace(records)], MergeMode.UNION)
                )
    return audits


def test_region_analysis_symmetry_and_exact_deltas(corpus_dir, manifest):
    with _report("Region analysis: 500 random matrices symmetric with zero "
                 "diagonal; fixture deltas exact"):
        rng = random.Random(6500)
        checked = 0
        while checked < 500:
            audits = _random_corpus(rng)
            if len(group_by_region(audits)) < 2:
                continue
            matrix = pairwise_region_matrix(audits)
            n = len(matrix.regions)
            for i in range(n):
                assert matrix.values[i][i] == 0
                for j in range(n):
                    assert matrix.values[i][j] == matrix.values[j][i]
            checked += 1

        traces = {}
        for path in sorted(corpus_dir.glob("*.jsonl")):
            trace = load_trace(path)
            traces.setdefault((trace.site, trace.region), []).append(trace)
        merged = [
            merge_iterations(group, MergeMode.UNION) for group in traces.values()
        ]
        deltas, _ = site_deltas(group_by_region(merged), "EU")
        by_key = {(d.region, d.site): d for d in deltas}
        for region, sites in manifest["deltas"].items():
            for site, want in sites.items():
                delta = by_key[(region, site)]
                assert delta.delta_cookie_count == want["cookies"], (region, site)
                for outcome in (
                    Outcome.IGNORED_REJECTION,
                    Outcome.UNDECLARED,
                    Outcome.WRONG_CATEGORY,
                ):
                    assert (
                        delta.delta_violation_count[outcome] == want[outcome.value]
                    ), (region, site, outcome)

        matrix = pairwise_region_matrix(merged)
        for pair, want in manifest["banner_matrix"].items():
            region_a, region_b = pair.split("|")
            assert matrix.entry(region_a, region_b) == want
