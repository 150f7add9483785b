from abc import ABC, abstractmethod

import numpy as np

from ..data.tabular import Dataset, LabelVector
from ..exceptions import ModelError


class BlackBoxModel(ABC):
    """
    A prediction oracle M: Dataset -> LabelVector.

    Implementations must be pure with respect to their input dataset and always answer
    with labels in 1..g, where g is fixed when the model is created.
    """

    kind: str = "abstract"

    def __init__(self, p: int, g: int):
        """
        Args:
            p (int): number of feature columns the model expects
            g (int): number of classes
        """
        self.p = p
        self.g = g

    @abstractmethod
    def _predict(self, dataset: Dataset) -> np.ndarray:
        """Return an int array of length n with labels in 1..g."""

    @abstractmethod
    def fingerprint(self) -> str:
        """Stable identifier of the model for report provenance."""

    def predict(self, dataset: Dataset) -> LabelVector:
        """Predict class labels for every row of `dataset`."""
        self._check_columns(dataset)
        return LabelVector.trusted(self._predict(dataset), self.g)

    def class_scores(self, dataset: Dataset, classes: np.ndarray) -> np.ndarray:
        """
        One-vs-rest score of each row for its given class.

        Without access to model internals the score is the indicator that the model
        predicts that class.
        """
        predicted = self.predict(dataset).labels
        return (predicted == np.asarray(classes)).astype(np.float64)

    def close(self) -> None:
        """Release external resources; no-op for in-process models."""

    def _check_columns(self, dataset: Dataset) -> None:
        if dataset.p != self.p:
            raise ModelError(
                f"column-count mismatch: model expects {self.p} features, dataset has {dataset.p}",
                stage="predict"
            )

    def __enter__(self) -> "BlackBoxModel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def __str__(self) -> str:
        return f"{self.kind} model (p={self.p}, g={self.g})"
