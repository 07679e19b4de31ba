"""Random-forest classifier: bootstrapped, feature-subsampled Gini trees
with soft-vote probability aggregation and deterministic parallel training.

Each tree draws its randomness from an independent child stream of the
configured seed, so the fitted ensemble is a pure function of
(data, config) no matter how many worker threads run the build.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ._rng import child_seed
from ._tree import build_tree, predict_proba_rows
from ._validation import check_labels, check_matrix, check_probabilities

__all__ = [
    "ForestConfig",
    "ForestEnsemble",
    "RandomForest",
    "gini_impurity",
    "ranked_indices",
    "top_k",
]


def gini_impurity(class_counts: Sequence[int]) -> float:
    """Gini impurity of a count vector: 1 - sum((c/N)^2)."""
    counts = np.asarray(class_counts, dtype=np.int64)
    if counts.ndim != 1 or (counts < 0).any():
        raise ValueError("class counts must be a 1-d non-negative vector")
    total = int(counts.sum())
    if total <= 0:
        raise ValueError("gini impurity undefined for zero total count")
    frac = counts / total
    return float(1.0 - np.dot(frac, frac))


def ranked_indices(probs: np.ndarray) -> np.ndarray:
    """Class indices by descending probability; ties keep class order."""
    return np.argsort(-np.asarray(probs, dtype=np.float64), kind="stable")


def top_k(dist, class_codes: Sequence[str], k: int) -> list[tuple[str, float]]:
    """The k most probable classes, tie-broken by class order."""
    p = check_probabilities(dist)
    if len(p) != len(class_codes):
        raise ValueError("distribution is not aligned to the class list")
    if not (1 <= k <= len(p)):
        raise ValueError(f"k must be in [1, {len(p)}], got {k}")
    order = ranked_indices(p)[:k]
    return [(class_codes[i], float(p[i])) for i in order]


@dataclass(frozen=True)
class ForestConfig:
    """Training hyperparameters.  ``features_per_split=None`` means
    floor(sqrt(d)); ``max_depth=None`` means unlimited."""

    n_trees: int = 500
    features_per_split: int | None = None
    max_depth: int | None = None
    min_leaf_size: int = 1
    min_split_size: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be >= 1")
        if self.min_leaf_size < 1 or self.min_split_size < 2:
            raise ValueError("min_leaf_size >= 1 and min_split_size >= 2 required")

    def resolve_mtry(self, d: int) -> int:
        if self.features_per_split is None:
            return max(1, int(np.sqrt(d)))
        if self.features_per_split > d:
            raise ValueError(
                f"features_per_split={self.features_per_split} exceeds dimension {d}"
            )
        return self.features_per_split

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "features_per_split": self.features_per_split,
            "max_depth": self.max_depth,
            "min_leaf_size": self.min_leaf_size,
            "min_split_size": self.min_split_size,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ForestConfig":
        return cls(**{k: doc[k] for k in cls().to_dict()})


class ForestEnsemble:
    """Fitted trees in flat concatenated arrays (immutable after build)."""

    def __init__(
        self,
        n_classes: int,
        tree_nodes: list[tuple[np.ndarray, ...]],
    ):
        self.n_classes = n_classes
        self.n_trees = len(tree_nodes)
        node_counts = [len(t[0]) for t in tree_nodes]
        leaf_counts = [len(t[4]) for t in tree_nodes]
        self.node_offsets = np.concatenate([[0], np.cumsum(node_counts)]).astype(np.int64)
        self.leaf_offsets = np.concatenate([[0], np.cumsum(leaf_counts)]).astype(np.int64)
        self.roots = self.node_offsets[:-1].copy()

        self.feature = np.concatenate([t[0] for t in tree_nodes])
        self.threshold = np.concatenate([t[1] for t in tree_nodes])
        left = []
        right = []
        for t, (feat, _, lf, rt, _, _) in enumerate(tree_nodes):
            is_leaf = feat < 0
            off_nodes = self.node_offsets[t]
            off_leaf = self.leaf_offsets[t]
            lf = lf + np.where(is_leaf, off_leaf, off_nodes)
            rt = rt + np.where(is_leaf, off_leaf, off_nodes)
            left.append(lf)
            right.append(rt)
        self.left = np.concatenate(left)
        self.right = np.concatenate(right)
        self.leaf_classes = np.concatenate([t[4] for t in tree_nodes])
        self.leaf_counts = np.concatenate([t[5] for t in tree_nodes])

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = check_matrix(X)
        out = np.zeros((X.shape[0], self.n_classes))
        predict_proba_rows(
            X,
            self.roots,
            self.feature,
            self.threshold,
            self.left,
            self.right,
            self.leaf_classes,
            self.leaf_counts,
            self.n_classes,
            out,
        )
        return out

    def tree_local_arrays(self, t: int) -> tuple[np.ndarray, ...]:
        """One tree's node arrays with tree-local child/leaf indices."""
        lo, hi = self.node_offsets[t], self.node_offsets[t + 1]
        klo, khi = self.leaf_offsets[t], self.leaf_offsets[t + 1]
        feat = self.feature[lo:hi]
        is_leaf = feat < 0
        left = self.left[lo:hi] - np.where(is_leaf, klo, lo)
        right = self.right[lo:hi] - np.where(is_leaf, klo, lo)
        return (
            feat,
            self.threshold[lo:hi],
            left,
            right,
            self.leaf_classes[klo:khi],
            self.leaf_counts[klo:khi],
        )


class RandomForest:
    """Estimator-style interface: ``fit(X, y)`` / ``predict_proba(X)``.

    ``n_jobs`` controls worker threads only; it never changes the result.
    """

    def __init__(
        self,
        n_trees: int = 500,
        features_per_split: int | None = None,
        max_depth: int | None = None,
        min_leaf_size: int = 1,
        min_split_size: int = 2,
        seed: int = 0,
    ):
        self.n_trees = n_trees
        self.features_per_split = features_per_split
        self.max_depth = max_depth
        self.min_leaf_size = min_leaf_size
        self.min_split_size = min_split_size
        self.seed = seed

    def get_params(self, deep: bool = True) -> dict:
        return {
            "n_trees": self.n_trees,
            "features_per_split": self.features_per_split,
            "max_depth": self.max_depth,
            "min_leaf_size": self.min_leaf_size,
            "min_split_size": self.min_split_size,
            "seed": self.seed,
        }

    def set_params(self, **params) -> "RandomForest":
        known = self.get_params()
        for key, value in params.items():
            if key not in known:
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    @property
    def config(self) -> ForestConfig:
        return ForestConfig(**self.get_params())

    def fit(
        self,
        X,
        y,
        n_classes: int | None = None,
        n_jobs: int = 1,
    ) -> "RandomForest":
        X = check_matrix(X)
        y = check_labels(y, X.shape[0])
        if np.unique(y).size < 2:
            raise ValueError("training labels contain a single class")
        if n_classes is None:
            n_classes = int(y.max()) + 1
        elif y.max() >= n_classes:
            raise ValueError("labels exceed the declared class count")
        config = self.config
        self.n_classes_ = int(n_classes)
        self.n_features_ = X.shape[1]
        self.ensemble_ = train_trees(X, y, self.n_classes_, config, n_jobs=n_jobs)
        return self

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_matrix(X)
        if X.shape[1] != self.n_features_:
            raise ValueError(
                f"expected {self.n_features_} features, got {X.shape[1]}"
            )
        return self.ensemble_.predict_proba(X)

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        return np.array([ranked_indices(row)[0] for row in proba], dtype=np.int64)

    def _check_fitted(self) -> None:
        if not hasattr(self, "ensemble_"):
            raise RuntimeError("RandomForest is not fitted; call fit() first")


def train_trees(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    config: ForestConfig,
    n_jobs: int = 1,
) -> ForestEnsemble:
    """Build the ensemble; identical output for any ``n_jobs``."""
    mtry = config.resolve_mtry(X.shape[1])
    max_depth = -1 if config.max_depth is None else config.max_depth

    def one(t: int):
        return build_tree(
            X,
            y,
            n_classes,
            np.uint64(child_seed(config.seed, t)),
            mtry,
            max_depth,
            config.min_leaf_size,
            config.min_split_size,
        )

    if n_jobs <= 1:
        trees = [one(t) for t in range(config.n_trees)]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(one, range(config.n_trees)))
    return ForestEnsemble(n_classes, trees)


def with_seed(config: ForestConfig, seed: int) -> ForestConfig:
    return replace(config, seed=seed)
