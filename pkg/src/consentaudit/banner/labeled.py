"""Labeled-page container for training and evaluating the button detector.

Same line-delimited format as traces; record kinds:
  page         {page_id, html}
  button_label {page_id, locator}
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import IO

from ..errors import DegenerateData, SchemaViolation
from ..traceio import read_records, write_records
from .candidates import CandidateElement, extract_candidates
from .features import Vocabulary, default_vocabulary, featurize
from .forest import ForestModel, rank, recall_at_k_from_rankings, train


@dataclass(frozen=True)
class LabeledPage:
    page_id: str
    html: str
    gold_locators: frozenset[str]

    def candidates(self) -> list[CandidateElement]:
        return extract_candidates(self.html)


def load_labeled_pages(data: bytes | IO[bytes]) -> list[LabeledPage]:
    htmls: dict[str, str] = {}
    golds: dict[str, set[str]] = {}
    order: list[str] = []
    for offset, record in read_records(data):
        kind = record.get("kind")
        if kind == "page":
            page_id = record["page_id"]
            if page_id in htmls:
                raise SchemaViolation(f"duplicate page_id {page_id!r}")
            htmls[page_id] = record["html"]
            order.append(page_id)
        elif kind == "button_label":
            golds.setdefault(record["page_id"], set()).add(record["locator"])
        else:
            raise SchemaViolation(
                f"unknown record kind {kind!r} at byte {offset}"
            )
    unknown = set(golds) - set(htmls)
    if unknown:
        raise SchemaViolation(f"button_label for unknown page {sorted(unknown)[0]!r}")
    return [
        LabeledPage(
            page_id=page_id,
            html=htmls[page_id],
            gold_locators=frozenset(golds.get(page_id, ())),
        )
        for page_id in order
    ]


def save_labeled_pages(pages: list[LabeledPage]) -> bytes:
    records: list[dict] = []
    for page in pages:
        records.append({"kind": "page", "page_id": page.page_id, "html": page.html})
        for locator in sorted(page.gold_locators):
            records.append(
                {"kind": "button_label", "page_id": page.page_id, "locator": locator}
            )
    return write_records(records)


def training_rows(
    pages: list[LabeledPage], vocab: Vocabulary | None = None
) -> list[tuple[tuple[float, ...], bool]]:
    vocab = vocab or default_vocabulary()
    rows = []
    for page in pages:
        for candidate in page.candidates():
            rows.append(
                (featurize(candidate, vocab), candidate.locator in page.gold_locators)
            )
    return rows


def cross_validate(
    pages: list[LabeledPage],
    folds: int = 10,
    seed: int = 0,
    ks: tuple[int, ...] = (1, 3, 5, 10),
    trees: int = 100,
    vocab: Vocabulary | None = None,
) -> tuple[list[dict[int, float]], dict[int, float]]:
    """k-fold recall@k; eval pages never contribute training rows."""
    if folds < 2:
        raise ValueError("cross-validation needs at least 2 folds")
    eligible = [p for p in pages if p.gold_locators]
    if len(eligible) < folds:
        raise DegenerateData(f"{len(eligible)} labeled pages cannot fill {folds} folds")
    vocab = vocab or default_vocabulary()
    shuffled = list(eligible)
    random.Random(seed).shuffle(shuffled)
    assignments = [shuffled[i::folds] for i in range(folds)]

    per_fold: list[dict[int, float]] = []
    for fold_index, held_out in enumerate(assignments):
        train_pages = [p for i, fold in enumerate(assignments) if i != fold_index for p in fold]
        model = train(
            training_rows(train_pages, vocab),
            trees=trees,
            seed=seed + fold_index,
            vocabulary=vocab,
        )
        rankings = [
            (
                [c.locator for c, _ in rank(page.candidates(), model)],
                set(page.gold_locators),
            )
            for page in held_out
        ]
        per_fold.append({k: recall_at_k_from_rankings(rankings, k) for k in ks})
    means = {k: sum(fold[k] for fold in per_fold) / folds for k in ks}
    return per_fold, means


def evaluate_model(
    pages: list[LabeledPage], model: ForestModel, ks: tuple[int, ...] = (1, 3, 5, 10)
) -> dict[int, float]:
    rankings = [
        ([c.locator for c, _ in rank(page.candidates(), model)], set(page.gold_locators))
        for page in pages
        if page.gold_locators
    ]
    return {k: recall_at_k_from_rankings(rankings, k) for k in ks}
