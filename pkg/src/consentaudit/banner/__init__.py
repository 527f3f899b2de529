from .candidates import CandidateElement, extract_candidates
from .features import FEATURE_DIM, FeatureVector, Vocabulary, default_vocabulary, featurize
from .forest import (
    ForestModel,
    load_model,
    rank,
    recall_at_k,
    recall_at_k_from_rankings,
    save_model,
    train,
)
from .labeled import (
    LabeledPage,
    cross_validate,
    evaluate_model,
    load_labeled_pages,
    save_labeled_pages,
    training_rows,
)

__all__ = [
    "CandidateElement",
    "extract_candidates",
    "FEATURE_DIM",
    "FeatureVector",
    "Vocabulary",
    "default_vocabulary",
    "featurize",
    "ForestModel",
    "train",
    "rank",
    "recall_at_k",
    "recall_at_k_from_rankings",
    "save_model",
    "load_model",
    "LabeledPage",
    "load_labeled_pages",
    "save_labeled_pages",
    "training_rows",
    "cross_validate",
    "evaluate_model",
]
