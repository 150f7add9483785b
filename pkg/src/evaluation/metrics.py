"""
Evaluation metrics for global feature-importance explanations.
"""
import math
from typing import Dict, Literal, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats

from ..data.streams import make_rng
from ..data.tabular import Dataset, LabelVector, permute_column, permute_columns
from ..exceptions import ConfigError, DataError, UndefinedCorrelationError
from ..explain.policy import changed_fraction
from ..models.blackbox import BlackBoxModel

ScoreSource = Literal["cpath-fraction", "cpath-stationary", "pfi", "gini", "external"]


class ExplanationScores(BaseModel):
    model_config = ConfigDict(frozen=True)

    scores: Tuple[float, ...]
    source: ScoreSource = "external"

    @model_validator(mode="after")
    def _finite(self) -> "ExplanationScores":
        if not all(math.isfinite(s) for s in self.scores):
            raise ValueError("scores must be finite")
        return self

    @property
    def p(self) -> int:
        return len(self.scores)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.scores, dtype=np.float64)

    @classmethod
    def of(cls, scores: Sequence[float], source: ScoreSource = "external") -> "ExplanationScores":
        return cls(scores=tuple(float(s) for s in scores), source=source)


class InfidelityConfig(BaseModel):
    perturbation: Literal["gaussian", "baseline"] = "gaussian"
    sigma: float = Field(0.1, gt=0.0, description="Noise scale for gaussian perturbations")
    baseline: Optional[Tuple[float, ...]] = Field(None, description="Replacement values; zeros when omitted")
    n_samples: int = Field(50, ge=1)
    seed: int = Field(0, ge=0)
    form: Literal["squared", "raw"] = "squared"


class InfidelityResult(BaseModel):
    value: float
    stderr: float
    n_samples: int


def accuracy(predicted: LabelVector, labels: LabelVector) -> float:
    return float(np.mean(predicted.labels == labels.labels))


def pfi(
    model: BlackBoxModel,
    dataset: Dataset,
    labels: LabelVector,
    n_repeats: int = 10,
    seed: int = 0
) -> ExplanationScores:
    """Permutation feature importance: mean accuracy drop after permuting each column."""
    if labels.n != dataset.n:
        raise DataError(f"{labels.n} labels for {dataset.n} rows", stage="pfi")
    if n_repeats < 1:
        raise ConfigError(f"n_repeats must be >= 1, got {n_repeats}", stage="pfi")
    base = accuracy(model.predict(dataset), labels)
    scores = []
    for j in range(dataset.p):
        rng = make_rng(seed, j)
        drops = [base - accuracy(model.predict(permute_column(dataset, j, rng)), labels) for _ in range(n_repeats)]
        scores.append(float(np.mean(drops)))
    return ExplanationScores.of(scores, "pfi")


def _check_variance(series: np.ndarray, name: str) -> None:
    if np.ptp(series) == 0:
        raise UndefinedCorrelationError(f"{name} has zero variance (all values {series[0]:g})")


def rank_correlation(a: ExplanationScores, b: ExplanationScores) -> float:
    """Spearman correlation with average ranks for ties."""
    if a.p != b.p:
        raise DataError(f"score vectors differ in length: {a.p} vs {b.p}", stage="metrics")
    if a.p < 2:
        raise UndefinedCorrelationError("rank correlation needs at least two features")
    ranks_a = stats.rankdata(a.as_array())
    ranks_b = stats.rankdata(b.as_array())
    _check_variance(ranks_a, f"ranks of {a.source}")
    _check_variance(ranks_b, f"ranks of {b.source}")
    return float(stats.pearsonr(ranks_a, ranks_b)[0])


def top_features(scores: ExplanationScores, m: int) -> Tuple[int, ...]:
    """Indices of the m highest scores; ties go to the lowest index."""
    order = sorted(range(scores.p), key=lambda j: (-scores.scores[j], j))
    return tuple(order[:m])


def coverage(scores: ExplanationScores, signal_features: Sequence[int]) -> float:
    """Fraction of the signal features among the top-|signal| features."""
    signal = set(int(j) for j in signal_features)
    if not signal:
        raise ConfigError("coverage needs at least one signal feature", stage="metrics")
    return len(signal.intersection(top_features(scores, len(signal)))) / len(signal)


def sensitivity_n(
    model: BlackBoxModel,
    dataset: Dataset,
    scores: ExplanationScores,
    n_subset: int,
    n_samples: int = 100,
    seed: int = 0
) -> float:
    """
    Pearson correlation between summed attributions of random feature subsets of size
    n_subset and the output drop when those features are removed by permutation.

    The output is the share of rows still predicted as their original class, so the drop
    equals the changed fraction.
    """
    if not 1 <= n_subset <= dataset.p:
        raise ConfigError(f"n_subset must be in 1..{dataset.p}, got {n_subset}", stage="sensitivity")
    if scores.p != dataset.p:
        raise DataError(f"{scores.p} scores for {dataset.p} features", stage="sensitivity")
    rng = make_rng(seed)
    baseline = model.predict(dataset)
    attributions = np.empty(n_samples)
    drops = np.empty(n_samples)
    weights = scores.as_array()
    for s in range(n_samples):
        subset = np.sort(rng.choice(dataset.p, size=n_subset, replace=False))
        attributions[s] = weights[subset].sum()
        drops[s] = changed_fraction(baseline, model.predict(permute_columns(dataset, subset, rng)))
    try:
        _check_variance(attributions, "attribution sums")
        _check_variance(drops, "output changes")
    except UndefinedCorrelationError as e:
        raise UndefinedCorrelationError(
            f"sensitivity-{n_subset} undefined over {n_samples} subsets: {e.message}", stage="sensitivity"
        )
    return float(stats.pearsonr(attributions, drops)[0])


def infidelity(
    model: BlackBoxModel,
    dataset: Dataset,
    scores: ExplanationScores,
    config: Optional[InfidelityConfig] = None
) -> InfidelityResult:
    """
    Monte Carlo infidelity of a global explanation broadcast to every row.

    f(x) is the model's score for the class it originally predicts for x. Each sample draws
    a perturbation I per row and compares I . phi with f(x) - f(x - I).
    """
    config = config or InfidelityConfig()
    if scores.p != dataset.p:
        raise DataError(f"{scores.p} scores for {dataset.p} features", stage="infidelity")
    rng = make_rng(config.seed)
    X = dataset.values
    phi = scores.as_array()
    classes = model.predict(dataset).labels
    f_x = model.class_scores(dataset, classes)
    if config.perturbation == "baseline":
        baseline = np.zeros(dataset.p) if config.baseline is None else np.asarray(config.baseline, dtype=np.float64)
        if baseline.shape != (dataset.p,):
            raise ConfigError(f"baseline must have {dataset.p} entries", stage="infidelity")

    estimates = np.empty(config.n_samples)
    for s in range(config.n_samples):
        if config.perturbation == "gaussian":
            I = rng.normal(0.0, config.sigma, size=X.shape)
        else:
            mask = rng.random(X.shape) < 0.5
            I = np.where(mask, X - baseline, 0.0)
        f_removed = model.class_scores(dataset.with_values(X - I), classes)
        predicted_effect = I @ phi
        actual = f_x - f_removed
        if config.form == "squared":
            per_row = (predicted_effect - actual) ** 2
        else:
            per_row = predicted_effect - actual ** 2
        estimates[s] = per_row.mean()

    stderr = float(estimates.std(ddof=1) / math.sqrt(config.n_samples)) if config.n_samples > 1 else 0.0
    value = float(estimates.mean())
    logger.debug(f"Infidelity ({config.form}, {config.perturbation}) = {value:.4g} +/- {stderr:.2g}")
    return InfidelityResult(value=value, stderr=stderr, n_samples=config.n_samples)


def roc_auc(scores: np.ndarray, labels: LabelVector, positive: int = 2) -> float:
    """Area under the ROC curve from the rank-sum statistic."""
    positives = labels.labels == positive
    n_pos = int(positives.sum())
    n_neg = labels.n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedCorrelationError("AUC needs both classes present", stage="metrics")
    ranks = stats.rankdata(np.asarray(scores, dtype=np.float64))
    return float((ranks[positives].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def summarize(values: Sequence[float]) -> Dict[str, Optional[float]]:
    """min / mean / max / std, the layout of the per-seed result tables."""
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0:
        return {"min": None, "mean": None, "max": None, "std": None}
    return {
        "min": float(array.min()),
        "mean": float(array.mean()),
        "max": float(array.max()),
        "std": float(array.std(ddof=1)) if array.size > 1 else 0.0
    }
