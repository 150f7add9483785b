"""
Random forest classifier built from CART trees.

The forest is the reference black box: it is trained with greedy Gini splits on bootstrap
samples and exposes the mean decrease in Gini impurity as model-internal ground truth.
Splits are deterministic given the seed: candidate thresholds are midpoints between
consecutive distinct values, and ties in gain go to the lowest feature index, then the
lowest threshold.
"""
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field

from ..data.streams import make_rng
from ..data.tabular import Dataset, LabelVector
from ..exceptions import ConfigError, DataError, ModelError, UnsupportedOperationError
from .blackbox import BlackBoxModel

FOREST_SCHEMA = "cpath-forest/1"


class ForestConfig(BaseModel):
    n_trees: int = Field(500, ge=1, description="Number of trees")
    max_depth: Optional[int] = Field(None, ge=1, description="Depth cap; None grows until pure or min_leaf")
    mtry: Optional[int] = Field(None, ge=1, description="Features sampled per split; None = ceil(sqrt(p))")
    min_leaf: int = Field(1, ge=1, description="Minimum samples in each child of a split")
    seed: int = Field(0, ge=0)

    def resolve_mtry(self, p: int) -> int:
        mtry = self.mtry if self.mtry is not None else int(math.ceil(math.sqrt(p)))
        if not 1 <= mtry <= p:
            raise ConfigError(f"mtry must be in 1..{p}, got {mtry}", stage="train")
        return mtry


def gini_impurity(counts: np.ndarray) -> float:
    """Gini impurity 1 - sum(p_c^2) of a class-count vector."""
    total = counts.sum()
    if total == 0:
        return 0.0
    fractions = counts / total
    return float(1.0 - np.sum(fractions * fractions))


@dataclass(frozen=True)
class DecisionTree:
    """
    A fitted CART tree stored as flat node arrays.

    Leaves have feature == -1. `counts` holds the bootstrap class counts reaching each
    node (internal nodes included), which is all gini_importance needs.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    def leaf_class(self) -> np.ndarray:
        # argmax returns the first maximum, so ties go to the lowest class
        return np.argmax(self.counts, axis=1)

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def impurity_decrease(self, p: int) -> np.ndarray:
        """Per-feature sum of (impurity - weighted child impurity) x node sample fraction."""
        scores = np.zeros(p, dtype=np.float64)
        root_n = self.counts[0].sum()
        for node in np.flatnonzero(self.feature >= 0):
            node_counts = self.counts[node]
            left_counts = self.counts[self.left[node]]
            right_counts = self.counts[self.right[node]]
            n_node = node_counts.sum()
            child = (
                left_counts.sum() * gini_impurity(left_counts)
                + right_counts.sum() * gini_impurity(right_counts)
            ) / n_node
            scores[self.feature[node]] += (gini_impurity(node_counts) - child) * n_node / root_n
        return scores

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "counts": self.counts.tolist()
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DecisionTree":
        return cls(
            feature=np.asarray(data["feature"], dtype=np.int64),
            threshold=np.asarray(data["threshold"], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.int64),
            right=np.asarray(data["right"], dtype=np.int64),
            counts=np.asarray(data["counts"], dtype=np.int64)
        )


class _TreeBuilder:
    """Grows one CART tree on a bootstrap sample."""

    def __init__(self, X: np.ndarray, y: np.ndarray, g: int, config: ForestConfig, mtry: int,
                 rng: np.random.Generator):
        self.X = X
        self.y = y
        self.g = g
        self.config = config
        self.mtry = mtry
        self.rng = rng
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.counts: List[np.ndarray] = []

    def _new_node(self, rows: np.ndarray) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.counts.append(np.bincount(self.y[rows], minlength=self.g))
        return len(self.feature) - 1

    def _best_split(self, rows: np.ndarray) -> Optional[Tuple[int, float]]:
        n_node = rows.shape[0]
        min_leaf = self.config.min_leaf
        parent = gini_impurity(np.bincount(self.y[rows], minlength=self.g))
        candidates = np.sort(self.rng.choice(self.X.shape[1], size=self.mtry, replace=False))
        onehot = np.eye(self.g, dtype=np.float64)

        best: Optional[Tuple[int, float]] = None
        best_gain = -np.inf
        for f in candidates:
            x = self.X[rows, f]
            order = np.argsort(x, kind="stable")
            xs = x[order]
            ys = self.y[rows][order]
            left_counts = np.cumsum(onehot[ys], axis=0)[:-1]
            n_left = np.arange(1, n_node, dtype=np.float64)
            n_right = n_node - n_left
            valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
            if not valid.any():
                continue
            right_counts = left_counts[-1] + onehot[ys[-1]] - left_counts
            gini_left = 1.0 - np.sum((left_counts / n_left[:, None]) ** 2, axis=1)
            gini_right = 1.0 - np.sum((right_counts / n_right[:, None]) ** 2, axis=1)
            gain = parent - (n_left * gini_left + n_right * gini_right) / n_node
            gain = np.where(valid, gain, -np.inf)
            i = int(np.argmax(gain))
            if gain[i] > best_gain:
                best_gain = float(gain[i])
                threshold = (xs[i] + xs[i + 1]) / 2.0
                if threshold >= xs[i + 1]:
                    threshold = xs[i]
                best = (int(f), float(threshold))
        return best

    def build(self, rows: np.ndarray) -> DecisionTree:
        stack = [(self._new_node(rows), rows, 0)]
        while stack:
            node, node_rows, depth = stack.pop()
            node_counts = self.counts[node]
            if np.count_nonzero(node_counts) <= 1:
                continue
            if self.config.max_depth is not None and depth >= self.config.max_depth:
                continue
            if node_rows.shape[0] < 2 * self.config.min_leaf:
                continue
            split = self._best_split(node_rows)
            if split is None:
                continue
            f, threshold = split
            goes_left = self.X[node_rows, f] <= threshold
            left_rows, right_rows = node_rows[goes_left], node_rows[~goes_left]
            self.feature[node] = f
            self.threshold[node] = threshold
            self.left[node] = self._new_node(left_rows)
            self.right[node] = self._new_node(right_rows)
            # right pushed first so the left subtree is numbered first
            stack.append((self.right[node], right_rows, depth + 1))
            stack.append((self.left[node], left_rows, depth + 1))

        return DecisionTree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            counts=np.vstack(self.counts).astype(np.int64)
        )


class RandomForest(BlackBoxModel):
    """Majority-vote ensemble of CART trees; immutable once built."""

    kind = "builtin-forest"

    def __init__(self, trees: List[DecisionTree], p: int, g: int, config: ForestConfig):
        super().__init__(p=p, g=g)
        if not trees:
            raise ModelError("a forest needs at least one tree", stage="train")
        self.trees = list(trees)
        self.config = config
        self._stack_trees()

    def _stack_trees(self) -> None:
        offsets = np.cumsum([0] + [t.n_nodes for t in self.trees[:-1]])
        self._roots = offsets.astype(np.int64)
        self._feature = np.concatenate([t.feature for t in self.trees])
        self._threshold = np.concatenate([t.threshold for t in self.trees])
        self._left = np.concatenate([np.where(t.left >= 0, t.left + o, -1) for t, o in zip(self.trees, offsets)])
        self._right = np.concatenate([np.where(t.right >= 0, t.right + o, -1) for t, o in zip(self.trees, offsets)])
        self._leaf_class = np.concatenate([t.leaf_class() for t in self.trees])
        self._max_depth = max(t.depth() for t in self.trees)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def _leaf_votes(self, dataset: Dataset) -> np.ndarray:
        """(n, g) matrix of tree votes per class."""
        X = dataset.values
        n = X.shape[0]
        node = np.repeat(self._roots[:, None], n, axis=1)
        rows = np.arange(n)[None, :]
        for _ in range(self._max_depth):
            feature = self._feature[node]
            internal = feature >= 0
            if not internal.any():
                break
            x = X[rows, np.where(internal, feature, 0)]
            step = np.where(x <= self._threshold[node], self._left[node], self._right[node])
            node = np.where(internal, step, node)
        leaf_class = self._leaf_class[node]
        votes = np.zeros((n, self.g), dtype=np.int64)
        for c in range(self.g):
            votes[:, c] = np.count_nonzero(leaf_class == c, axis=0)
        return votes

    def _predict(self, dataset: Dataset) -> np.ndarray:
        # first maximum wins: vote ties go to the lowest class id
        return np.argmax(self._leaf_votes(dataset), axis=1).astype(np.int64) + 1

    def vote_fractions(self, dataset: Dataset) -> np.ndarray:
        """(n, g) matrix of the share of trees voting for each class."""
        self._check_columns(dataset)
        return self._leaf_votes(dataset) / float(self.n_trees)

    def class_scores(self, dataset: Dataset, classes: np.ndarray) -> np.ndarray:
        fractions = self.vote_fractions(dataset)
        classes = np.asarray(classes, dtype=np.int64)
        return fractions[np.arange(dataset.n), classes - 1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": FOREST_SCHEMA,
            "p": self.p,
            "g": self.g,
            "config": self.config.model_dump(),
            "trees": [t.to_dict() for t in self.trees]
        }

    def fingerprint(self) -> str:
        return hashlib.sha256(dump_forest(self).encode("utf-8")).hexdigest()


def train_random_forest(dataset: Dataset, labels: LabelVector, config: Optional[ForestConfig] = None) -> RandomForest:
    """
    Train a forest of CART trees on bootstrap samples.

    Args:
        dataset (Dataset): training features
        labels (LabelVector): paired class labels
        config (ForestConfig, optional): hyperparameters. Defaults to ForestConfig()

    Returns:
        RandomForest: the fitted forest
    """
    config = config or ForestConfig()
    if labels.n != dataset.n:
        raise DataError(f"{labels.n} labels for {dataset.n} rows", stage="train")
    if np.unique(labels.labels).size < 2:
        raise DataError("labels contain a single class; cannot train a classifier", stage="train")
    mtry = config.resolve_mtry(dataset.p)

    X = dataset.values
    y = labels.labels - 1
    trees = []
    for t in range(config.n_trees):
        rng = make_rng(config.seed, t)
        bootstrap = rng.integers(0, dataset.n, size=dataset.n)
        trees.append(_TreeBuilder(X, y, labels.g, config, mtry, rng).build(bootstrap))

    forest = RandomForest(trees, p=dataset.p, g=labels.g, config=config)
    logger.debug(f"Trained forest: {config.n_trees} trees, mtry={mtry}, max depth reached {forest._max_depth}")
    return forest


def gini_importance(model: BlackBoxModel) -> np.ndarray:
    """Mean decrease in Gini impurity per feature, averaged over trees."""
    if not isinstance(model, RandomForest):
        raise UnsupportedOperationError(
            f"gini importance requires the builtin forest, got {model.kind}", stage="gini"
        )
    total = np.zeros(model.p, dtype=np.float64)
    for tree in model.trees:
        total += tree.impurity_decrease(model.p)
    return total / model.n_trees


def dump_forest(forest: RandomForest) -> str:
    return json.dumps(forest.to_dict(), sort_keys=True)


def load_forest(text: str) -> RandomForest:
    try:
        data = json.loads(text)
        if data.get("schema") != FOREST_SCHEMA:
            raise ValueError(f"unexpected schema {data.get('schema')!r}")
        trees = [DecisionTree.from_dict(t) for t in data["trees"]]
        return RandomForest(trees, p=int(data["p"]), g=int(data["g"]), config=ForestConfig(**data["config"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"invalid forest dump: {e}", stage="model")
