"""In-process black boxes with known behaviour."""
import hashlib

import numpy as np

from src.models.blackbox import BlackBoxModel


class ConstantModel(BlackBoxModel):
    kind = "constant"

    def __init__(self, p: int, label: int = 1, g: int = 2):
        super().__init__(p=p, g=g)
        self.label = label

    def _predict(self, dataset):
        return np.full(dataset.n, self.label, dtype=np.int64)

    def fingerprint(self) -> str:
        return hashlib.sha256(f"constant:{self.p}:{self.label}".encode()).hexdigest()


class SignModel(BlackBoxModel):
    """Predicts class 2 when column `feature` is positive, else class 1."""

    kind = "sign"

    def __init__(self, p: int, feature: int = 0):
        super().__init__(p=p, g=2)
        self.feature = feature

    def _predict(self, dataset):
        return np.where(dataset.values[:, self.feature] > 0, 2, 1).astype(np.int64)

    def fingerprint(self) -> str:
        return hashlib.sha256(f"sign:{self.p}:{self.feature}".encode()).hexdigest()


class FailingModel(BlackBoxModel):
    """Answers the first `budget` requests, then raises."""

    kind = "failing"

    def __init__(self, p: int, budget: int = 1):
        super().__init__(p=p, g=2)
        self.budget = budget

    def _predict(self, dataset):
        if self.budget <= 0:
            raise RuntimeError("model crashed")
        self.budget -= 1
        return np.ones(dataset.n, dtype=np.int64)

    def fingerprint(self) -> str:
        return "failing"


class LinearScoreModel(BlackBoxModel):
    """Always predicts class 1; its score for any class is the linear response x . weights."""

    kind = "linear"

    def __init__(self, weights):
        super().__init__(p=len(weights), g=2)
        self.weights = np.asarray(weights, dtype=np.float64)

    def _predict(self, dataset):
        return np.ones(dataset.n, dtype=np.int64)

    def class_scores(self, dataset, classes):
        return dataset.values @ self.weights

    def fingerprint(self) -> str:
        return hashlib.sha256(f"linear:{self.weights.tolist()}".encode()).hexdigest()
