"""Random-forest ranking of candidate banner buttons.

Plain CART trees (Gini impurity, sqrt-sized random feature subsets,
bootstrap resampling) built on the 17-dim feature vectors. Training is
fully deterministic given (data, seed); models serialize to a
self-describing JSON file whose hash is stable across runs.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass
from typing import Sequence

from ..errors import DegenerateData, EmptyEvalSet
from .candidates import CandidateElement
from .features import FEATURE_DIM, FeatureVector, Vocabulary, default_vocabulary, featurize

MODEL_FORMAT = "consentaudit-forest"
DEFAULT_TREES = 100


@dataclass(frozen=True)
class _Leaf:
    probability: float

    def predict(self, x: Sequence[float]) -> float:
        return self.probability

    def to_obj(self):
        return {"p": self.probability}


@dataclass(frozen=True)
class _Split:
    feature: int
    threshold: float
    left: "_Split | _Leaf"
    right: "_Split | _Leaf"

    def predict(self, x: Sequence[float]) -> float:
        branch = self.left if x[self.feature] <= self.threshold else self.right
        return branch.predict(x)

    def to_obj(self):
        return {
            "f": self.feature,
            "t": self.threshold,
            "l": self.left.to_obj(),
            "r": self.right.to_obj(),
        }


def _node_from_obj(obj) -> "_Split | _Leaf":
    if "p" in obj:
        return _Leaf(probability=obj["p"])
    return _Split(
        feature=obj["f"],
        threshold=obj["t"],
        left=_node_from_obj(obj["l"]),
        right=_node_from_obj(obj["r"]),
    )


def _gini(positives: int, total: int) -> float:
    if total == 0:
        return 0.0
    p = positives / total
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _build_tree(
    rows: list[tuple[FeatureVector, bool]],
    rng: random.Random,
    max_depth: int,
    min_samples_leaf: int,
    n_subset: int,
    depth: int = 0,
) -> "_Split | _Leaf":
    total = len(rows)
    positives = sum(1 for _, label in rows if label)
    if positives == 0 or positives == total or depth >= max_depth:
        return _Leaf(probability=positives / total)

    features = rng.sample(range(FEATURE_DIM), n_subset)
    parent_gini = _gini(positives, total)
    best = None  # (weighted_gini, feature, threshold)
    for feature in features:
        values = sorted({row[0][feature] for row in rows})
        if len(values) < 2:
            continue
        for low, high in zip(values, values[1:]):
            threshold = (low + high) / 2.0
            left_total = left_pos = 0
            for fv, label in rows:
                if fv[feature] <= threshold:
                    left_total += 1
                    left_pos += label
            right_total = total - left_total
            right_pos = positives - left_pos
            if left_total < min_samples_leaf or right_total < min_samples_leaf:
                continue
            weighted = (
                left_total * _gini(left_pos, left_total)
                + right_total * _gini(right_pos, right_total)
            ) / total
            if best is None or weighted < best[0] - 1e-12:
                best = (weighted, feature, threshold)
    if best is None or best[0] >= parent_gini - 1e-12:
        return _Leaf(probability=positives / total)

    _, feature, threshold = best
    left_rows = [r for r in rows if r[0][feature] <= threshold]
    right_rows = [r for r in rows if r[0][feature] > threshold]
    return _Split(
        feature=feature,
        threshold=threshold,
        left=_build_tree(left_rows, rng, max_depth, min_samples_leaf, n_subset, depth + 1),
        right=_build_tree(right_rows, rng, max_depth, min_samples_leaf, n_subset, depth + 1),
    )


@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    seed: int
    vocabulary: Vocabulary
    max_depth: int
    min_samples_leaf: int

    def predict_proba(self, fv: FeatureVector) -> float:
        return sum(tree.predict(fv) for tree in self.trees) / len(self.trees)

    def to_obj(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": 1,
            "seed": self.seed,
            "n_trees": len(self.trees),
            "feature_dim": FEATURE_DIM,
            "hyperparameters": {
                "criterion": "gini",
                "max_features": "sqrt",
                "max_depth": self.max_depth,
                "min_samples_leaf": self.min_samples_leaf,
                "bootstrap": True,
            },
            "vocabulary": self.vocabulary.to_dict(),
            "vocabulary_hash": self.vocabulary.content_hash(),
            "trees": [tree.to_obj() for tree in self.trees],
        }

    def content_hash(self) -> str:
        canonical = json.dumps(self.to_obj(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def train(
    labeled: list[tuple[FeatureVector, bool]],
    trees: int = DEFAULT_TREES,
    seed: int = 0,
    vocabulary: Vocabulary | None = None,
    max_depth: int = 12,
    min_samples_leaf: int = 1,
) -> ForestModel:
    """Bootstrap-train a forest; bit-identical output for identical inputs."""
    if not labeled:
        raise DegenerateData("no training rows")
    labels = {label for _, label in labeled}
    if len(labels) < 2:
        raise DegenerateData("training data contains a single class")
    rng = random.Random(seed)
    n_subset = max(1, int(math.sqrt(FEATURE_DIM)))
    n = len(labeled)
    grown = []
    for _ in range(trees):
        sample = [labeled[rng.randrange(n)] for _ in range(n)]
        tree_rng = random.Random(rng.randrange(2**32))
        grown.append(
            _build_tree(sample, tree_rng, max_depth, min_samples_leaf, n_subset)
        )
    return ForestModel(
        trees=tuple(grown),
        seed=seed,
        vocabulary=vocabulary or default_vocabulary(),
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
    )


def save_model(model: ForestModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_obj(), fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> ForestModel:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} file")
    return ForestModel(
        trees=tuple(_node_from_obj(t) for t in obj["trees"]),
        seed=obj["seed"],
        vocabulary=Vocabulary.from_dict(obj["vocabulary"]),
        max_depth=obj["hyperparameters"]["max_depth"],
        min_samples_leaf=obj["hyperparameters"]["min_samples_leaf"],
    )


def rank(
    page_candidates: list[CandidateElement], model: ForestModel
) -> list[tuple[CandidateElement, float]]:
    """Candidates by predicted probability, ties in document order."""
    scored = [
        (candidate, model.predict_proba(featurize(candidate, model.vocabulary)))
        for candidate in page_candidates
    ]
    order = sorted(range(len(scored)), key=lambda i: (-scored[i][1], i))
    return [scored[i] for i in order]


def recall_at_k_from_rankings(
    rankings: list[tuple[list[str], set[str]]], k: int
) -> float:
    """Fraction of pages whose gold set intersects the top-k locators."""
    if not rankings:
        raise EmptyEvalSet("no evaluation pages")
    hits = 0
    for ordered_locators, gold in rankings:
        if not gold:
            raise ValueError("evaluation page has no gold buttons")
        if set(ordered_locators[:k]) & gold:
            hits += 1
    return hits / len(rankings)


def recall_at_k(
    eval_pages: list[tuple[list[CandidateElement], set[str]]],
    model: ForestModel,
    k: int,
) -> float:
    rankings = [
        ([c.locator for c, _ in rank(candidates, model)], gold)
        for candidates, gold in eval_pages
    ]
    return recall_at_k_from_rankings(rankings, k)
