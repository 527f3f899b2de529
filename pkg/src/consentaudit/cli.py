"""Command-line entry point: audit, train-buttons, diff-regions, report.

All outputs are deterministic functions of (inputs, config): files sort
their rows, floats render through one formatter, and no timestamps are
emitted, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import banner
from .classify import CorpusReport, classify_corpus
from .errors import (
    ConsentAuditError,
    DegenerateData,
    MissingBaseline,
    NoTraces,
    SingleRegion,
)
from .model import VIOLATION_OUTCOMES, Outcome
from .pi import (
    DEFAULT_ENTROPY_THRESHOLD,
    PiCategory,
    PurposeDatabase,
    label_corpus,
    likely_pi,
    summarize_pi,
)
from .regions import group_by_region, pairwise_region_matrix, site_deltas
from .stats import kruskal_wallis, levene
from .traceio import MergedAudit, MergeMode, load_trace, merge_iterations

# Model-inconsistency legend emitted with every report (not legal judgment).
OUTCOME_LEGEND = {
    Outcome.COMPLIANT: "cookie approved and not rejected by the recorded preferences",
    Outcome.IGNORED_REJECTION: "cookie transmitted although rejected and not approved",
    Outcome.UNDECLARED: "cookie transmitted without matching any declaration in the cookie library",
    Outcome.WRONG_CATEGORY: "cookie simultaneously approved and rejected via overlapping categories",
}

HISTOGRAM_PARAMETERS = ("reject_all_present", "consent_lifetime_days", "consent_model")


@dataclass
class AuditConfig:
    trace_dir: str = "."
    baseline_region: str = "EU"
    merge_mode: MergeMode = MergeMode.UNION
    pi_filter: bool = True
    entropy_threshold: float = DEFAULT_ENTROPY_THRESHOLD
    top_k: int = 5
    output_dir: str = "audit-out"
    purpose_db: str | None = None

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.entropy_threshold <= 0:
            raise ValueError("entropy_threshold must be positive")


def _fmt(x: float) -> str:
    if x != x:
        return "nan"
    return f"{x:.6g}"


def _verbose() -> bool:
    return os.environ.get("CONSENTAUDIT_VERBOSE", "") not in ("", "0")


def _log(message: str):
    if _verbose():
        print(message, file=sys.stderr)


def _write_csv(path: Path, header: list[str], rows: list[list]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    valid = {f.name for f in fields(AuditConfig)}
    unknown = set(data) - valid
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> AuditConfig:
    """Precedence: command-line flags > config file > defaults."""
    settings = _load_config_file(getattr(args, "config", None))
    for name in (
        "trace_dir",
        "baseline_region",
        "pi_filter",
        "entropy_threshold",
        "top_k",
        "output_dir",
        "purpose_db",
    ):
        value = getattr(args, name, None)
        if value is not None:
            settings[name] = value
    if getattr(args, "merge_mode", None) is not None:
        settings["merge_mode"] = MergeMode(args.merge_mode)
    elif "merge_mode" in settings:
        settings["merge_mode"] = MergeMode(settings["merge_mode"])
    return AuditConfig(**settings)


def _collect_merged(config: AuditConfig) -> tuple[list[MergedAudit], list[dict]]:
    trace_dir = Path(config.trace_dir)
    errors: list[dict] = []
    traces = []
    paths = sorted(trace_dir.glob("*.jsonl")) + sorted(trace_dir.glob("*.trace"))
    for path in paths:
        try:
            traces.append(load_trace(path))
            _log(f"parsed {path.name}")
        except ConsentAuditError as exc:
            errors.append({"file": path.name, "error": type(exc).__name__, "detail": str(exc)})
    if not traces:
        raise NoTraces(f"no parseable traces in {trace_dir}")
    grouped: dict[tuple[str, str], list] = {}
    for trace in traces:
        grouped.setdefault((trace.site, trace.region), []).append(trace)
    merged = [
        merge_iterations(group, config.merge_mode)
        for _, group in sorted(grouped.items())
    ]
    return merged, errors


def _corpus_rows(report: CorpusReport) -> list[list]:
    rows = []
    for region, row in sorted(report.rows.items()):
        csv_row = [region, row.sites_total, row.sites_classified]
        for outcome in VIOLATION_OUTCOMES:
            csv_row.append(row.violation_cookies[outcome])
            csv_row.append(_fmt(row.pct_websites[outcome]))
        csv_row.append(_fmt(row.pct_any_violation))
        csv_row.append(_fmt(row.pct_compliant))
        csv_row.append(_fmt(row.mean_cookies_per_site))
        rows.append(csv_row)
    return rows


def _stats_rows(report: CorpusReport) -> list[list]:
    """Per-measurement Levene/H results across regions, by cookie party."""
    by_region: dict[str, list] = {}
    for (site, region), site_report in sorted(report.site_reports.items()):
        if site_report.classified:
            by_region.setdefault(region, []).append(site_report)
    regions = sorted(by_region)
    if len(regions) < 2:
        return []
    measurements: list[tuple[str, str]] = [("mean_cookies", "")]
    measurements += [(f"{o.value}", "") for o in VIOLATION_OUTCOMES]
    rows = []
    for name, _ in measurements:
        for party in ("first_party", "third_party"):
            groups = []
            for region in regions:
                values = []
                for site_report in by_region[region]:
                    if name == "mean_cookies":
                        total = sum(site_report.counts.values())
                        third = sum(site_report.third_party_counts.values())
                    else:
                        outcome = Outcome(name)
                        total = site_report.counts[outcome]
                        third = site_report.third_party_counts[outcome]
                    values.append(float(third if party == "third_party" else total - third))
                groups.append(values)
            if any(len(g) < 2 for g in groups):
                continue
            try:
                lev = levene(groups)
                kw = kruskal_wallis(groups)
            except ConsentAuditError:
                continue
            rows.append(
                [
                    name,
                    party,
                    _fmt(lev.statistic),
                    _fmt(lev.p_value),
                    _fmt(kw.statistic),
                    _fmt(kw.p_value),
                ]
            )
    return rows


def cmd_audit(args: argparse.Namespace) -> int:
    config = build_config(args)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    merged, errors = _collect_merged(config)

    db = None
    if config.purpose_db:
        with open(config.purpose_db, "rb") as fh:
            db = PurposeDatabase.from_container(fh)

    report = classify_corpus(merged)
    labels = label_corpus(report, db=db, entropy_threshold=config.entropy_threshold)
    if config.pi_filter:
        include = lambda r, c: likely_pi(labels[(r.site, r.region, c.cookie_key)])
        report = classify_corpus(merged, include=include)
    breakdown = summarize_pi(report, labels)

    machine: list[dict] = [
        {"kind": "meta", "report_version": 1, "pi_filter": config.pi_filter,
         "merge_mode": config.merge_mode.value, "baseline_region": config.baseline_region,
         "levene_centering": "mean", "kruskal_tie_correction": "midrank",
         "banner_matrix_weighting": "equal"}
    ]
    for outcome, text in OUTCOME_LEGEND.items():
        machine.append({"kind": "legend", "outcome": outcome.value, "definition": text})

    site_rows = []
    for (site, region), site_report in sorted(report.site_reports.items()):
        row = [site, region]
        for outcome in Outcome:
            row.append(site_report.counts.get(outcome, 0))
        for outcome in Outcome:
            row.append(site_report.third_party_counts.get(outcome, 0))
        row.extend(
            [
                str(site_report.compliant_site).lower(),
                site_report.pre_consent_only,
                site_report.out_of_scope,
                ";".join(site_report.diagnostics),
            ]
        )
        site_rows.append(row)
        machine.append(
            {
                "kind": "site_report",
                "site": site,
                "region": region,
                "counts": {o.value: site_report.counts.get(o, 0) for o in Outcome},
                "third_party_counts": {
                    o.value: site_report.third_party_counts.get(o, 0) for o in Outcome
                },
                "compliant_site": site_report.compliant_site,
                "pre_consent_only": site_report.pre_consent_only,
                "out_of_scope": site_report.out_of_scope,
                "diagnostics": list(site_report.diagnostics),
                "cookies": [
                    {
                        "name": c.cookie_key[0],
                        "domain": c.cookie_key[1],
                        "path": c.cookie_key[2],
                        "outcome": c.outcome.value,
                        "party": c.party.value,
                        "phase_first_seen": c.phase_first_seen.value,
                        "evidence": [
                            {"category_id": cid, "choice": choice.value}
                            for cid, choice in c.evidence
                        ],
                        "pi_category": labels[(site, region, c.cookie_key)].category.value,
                    }
                    for c in site_report.classifications
                ],
            }
        )
    _write_csv(
        out / "site_reports.csv",
        ["site", "region"]
        + [f"count_{o.value}" for o in Outcome]
        + [f"third_party_{o.value}" for o in Outcome]
        + ["compliant_site", "pre_consent_only", "out_of_scope", "diagnostics"],
        site_rows,
    )

    corpus_header = ["region", "sites_total", "sites_classified"]
    for outcome in VIOLATION_OUTCOMES:
        corpus_header += [f"cookies_{outcome.value}", f"pct_websites_{outcome.value}"]
    corpus_header += ["pct_any_violation", "pct_compliant", "mean_cookies_per_site"]
    _write_csv(out / "corpus_report.csv", corpus_header, _corpus_rows(report))
    for region, row in sorted(report.rows.items()):
        machine.append(
            {
                "kind": "region_row",
                "region": region,
                "sites_total": row.sites_total,
                "sites_classified": row.sites_classified,
                "violation_cookies": {
                    o.value: row.violation_cookies[o] for o in VIOLATION_OUTCOMES
                },
                "pct_websites": {
                    o.value: row.pct_websites[o] for o in VIOLATION_OUTCOMES
                },
                "pct_any_violation": row.pct_any_violation,
                "pct_compliant": row.pct_compliant,
            }
        )

    pi_rows = []
    for region, percentages in sorted(breakdown.rows.items()):
        for category in PiCategory:
            pi_rows.append(
                [
                    region,
                    category.value,
                    _fmt(percentages[category]),
                    breakdown.counts[region][category],
                ]
            )
            machine.append(
                {
                    "kind": "pi_row",
                    "region": region,
                    "category": category.value,
                    "percent": percentages[category],
                    "count": breakdown.counts[region][category],
                }
            )
    _write_csv(out / "pi_breakdown.csv", ["region", "category", "percent", "count"], pi_rows)

    grouped = group_by_region(merged)
    delta_rows = []
    if config.baseline_region in grouped:
        deltas, delta_diags = site_deltas(grouped, config.baseline_region)
        for delta in deltas:
            row = [
                delta.site,
                delta.region,
                delta.baseline_region,
                _fmt(delta.delta_cookie_count),
            ]
            row += [_fmt(delta.delta_violation_count[o]) for o in VIOLATION_OUTCOMES]
            delta_rows.append(row)
            machine.append(
                {
                    "kind": "delta",
                    "site": delta.site,
                    "region": delta.region,
                    "baseline_region": delta.baseline_region,
                    "delta_cookie_count": delta.delta_cookie_count,
                    "delta_violation_count": {
                        o.value: delta.delta_violation_count[o]
                        for o in VIOLATION_OUTCOMES
                    },
                }
            )
        for diag in delta_diags:
            machine.append({"kind": "diagnostic", "source": "site_deltas", "detail": diag})
    else:
        machine.append(
            {
                "kind": "diagnostic",
                "source": "site_deltas",
                "detail": f"baseline region {config.baseline_region!r} absent; deltas skipped",
            }
        )
    _write_csv(
        out / "region_deltas.csv",
        ["site", "region", "baseline_region", "delta_cookie_count"]
        + [f"delta_{o.value}" for o in VIOLATION_OUTCOMES],
        delta_rows,
    )

    if len(grouped) >= 2:
        matrix = pairwise_region_matrix(merged)
        matrix_rows = [
            [region] + list(map(str, matrix.values[i]))
            for i, region in enumerate(matrix.regions)
        ]
        _write_csv(
            out / "banner_matrix.csv", ["region"] + list(matrix.regions), matrix_rows
        )
        for i, region in enumerate(matrix.regions):
            machine.append(
                {
                    "kind": "matrix_row",
                    "region": region,
                    "entries": dict(zip(matrix.regions, matrix.values[i])),
                }
            )

    stats_rows = _stats_rows(report)
    _write_csv(
        out / "stats_table.csv",
        ["measurement", "party", "levene_w", "levene_p", "h_statistic", "h_p"],
        stats_rows,
    )
    for row in stats_rows:
        machine.append(
            {
                "kind": "stats_row",
                "measurement": row[0],
                "party": row[1],
                "levene_w": row[2],
                "levene_p": row[3],
                "h_statistic": row[4],
                "h_p": row[5],
            }
        )

    for error in errors:
        machine.append({"kind": "error", **error})
    with open(out / "audit_report.jsonl", "w", encoding="utf-8") as fh:
        for record in machine:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    _log(f"wrote reports to {out}")
    return 0


def cmd_train_buttons(args: argparse.Namespace) -> int:
    if args.folds < 2:
        print("error: --folds must be >= 2 for cross-validation", file=sys.stderr)
        return 2
    with open(args.labeled_file, "rb") as fh:
        pages = banner.load_labeled_pages(fh)
    vocab = banner.default_vocabulary()
    per_fold, means = banner.cross_validate(
        pages, folds=args.folds, seed=args.seed, trees=args.trees, vocab=vocab
    )
    ks = sorted(means)
    print("fold," + ",".join(f"recall@{k}" for k in ks))
    for index, fold in enumerate(per_fold):
        print(f"{index}," + ",".join(_fmt(fold[k]) for k in ks))
    print("mean," + ",".join(_fmt(means[k]) for k in ks))

    model = banner.train(
        banner.training_rows(pages, vocab),
        trees=args.trees,
        seed=args.seed,
        vocabulary=vocab,
    )
    banner.save_model(model, args.model_out)
    print(f"model_hash,{model.content_hash()}")
    print(f"model_file,{args.model_out}")
    return 0


def cmd_diff_regions(args: argparse.Namespace) -> int:
    config = build_config(args)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    merged, _errors = _collect_merged(config)
    matrix = pairwise_region_matrix(merged)  # raises SingleRegion

    matrix_rows = [
        [region] + list(map(str, matrix.values[i]))
        for i, region in enumerate(matrix.regions)
    ]
    _write_csv(out / "banner_matrix.csv", ["region"] + list(matrix.regions), matrix_rows)

    histogram_rows = []
    grouped = group_by_region(merged)
    for parameter in HISTOGRAM_PARAMETERS:
        for region in sorted(grouped):
            tally: dict[str, int] = {}
            for site in grouped[region]:
                value = (
                    grouped[region][site]
                    .traces[-1]
                    .banner.as_dict()
                    .get(parameter, "(absent)")
                )
                tally[value] = tally.get(value, 0) + 1
            for value in sorted(tally):
                histogram_rows.append([parameter, region, value, tally[value]])
    _write_csv(
        out / "banner_histograms.csv",
        ["parameter", "region", "value", "site_count"],
        histogram_rows,
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    path = Path(args.output_dir) / "audit_report.jsonl"
    with open(path, "r", encoding="utf-8") as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    legend = [r for r in records if r["kind"] == "legend"]
    rows = [r for r in records if r["kind"] == "region_row"]
    print("violation outcome legend:")
    for entry in legend:
        print(f"  {entry['outcome']}: {entry['definition']}")
    print()
    print("per-region summary:")
    for row in rows:
        cookies = row["violation_cookies"]
        pct = row["pct_websites"]
        print(
            f"  {row['region']}: {row['sites_classified']}/{row['sites_total']} sites classified; "
            + "; ".join(
                f"{name} {cookies[name]} cookies ({pct[name]:.2f}% of sites)"
                for name in cookies
            )
            + f"; any violation {row['pct_any_violation']:.2f}%"
        )
    errors = [r for r in records if r["kind"] == "error"]
    if errors:
        print()
        print(f"{len(errors)} trace file(s) failed to parse:")
        for error in errors:
            print(f"  {error['file']}: {error['error']}: {error['detail']}")
    return 0


def _add_common_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON config file (flags win over it)")
    parser.add_argument("--trace-dir", dest="trace_dir")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--baseline-region", dest="baseline_region")
    parser.add_argument(
        "--merge-mode", dest="merge_mode", choices=[m.value for m in MergeMode]
    )
    parser.add_argument(
        "--pi-filter",
        dest="pi_filter",
        action=argparse.BooleanOptionalAction,
        default=None,
    )
    parser.add_argument("--entropy-threshold", dest="entropy_threshold", type=float)
    parser.add_argument("--top-k", dest="top_k", type=int)
    parser.add_argument("--purpose-db", dest="purpose_db")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consentaudit",
        description="Offline cookie-consent compliance auditing over crawl traces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_audit = sub.add_parser("audit", help="classify a trace corpus and emit reports")
    _add_common_flags(p_audit)
    p_audit.set_defaults(func=cmd_audit)

    p_train = sub.add_parser("train-buttons", help="train the banner-button ranker")
    p_train.add_argument("labeled_file")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--folds", type=int, default=10)
    p_train.add_argument("--trees", type=int, default=100)
    p_train.add_argument("--model-out", default="button_model.json")
    p_train.set_defaults(func=cmd_train_buttons)

    p_diff = sub.add_parser("diff-regions", help="pairwise banner config diffs")
    _add_common_flags(p_diff)
    p_diff.set_defaults(func=cmd_diff_regions)

    p_report = sub.add_parser("report", help="print a summary of an audit run")
    p_report.add_argument("--output-dir", dest="output_dir", default="audit-out")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NoTraces, SingleRegion, MissingBaseline, DegenerateData) as exc:
        summary = {"error": type(exc).__name__, "detail": str(exc)}
        print(json.dumps(summary), file=sys.stderr)
        return 1
    except ConsentAuditError as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
