"""
Counterfactual policies: when does a cumulative perturbation change enough predictions?
"""
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..data.tabular import LabelVector
from ..exceptions import ConfigError, DataError


class CounterfactualPolicy(BaseModel):
    """
    `stochastic` fires with probability equal to the changed fraction;
    `threshold` fires when the changed fraction strictly exceeds kappa.
    """

    model_config = ConfigDict(frozen=True)

    variant: Literal["stochastic", "threshold"] = "stochastic"
    kappa: Optional[float] = Field(None, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _kappa_for_threshold(self) -> "CounterfactualPolicy":
        if self.variant == "threshold" and self.kappa is None:
            raise ValueError("threshold policy needs kappa")
        if self.variant == "stochastic" and self.kappa is not None:
            raise ValueError("stochastic policy takes no kappa")
        return self

    def __str__(self) -> str:
        return self.variant if self.variant == "stochastic" else f"threshold:{self.kappa:g}"


def parse_policy(text: str) -> CounterfactualPolicy:
    """Parse `stochastic` or `threshold:<kappa>`."""
    text = text.strip()
    try:
        if text == "stochastic":
            return CounterfactualPolicy()
        if text.startswith("threshold:"):
            return CounterfactualPolicy(variant="threshold", kappa=float(text.split(":", 1)[1]))
    except ValueError as e:
        raise ConfigError(f"invalid policy {text!r}: {e}", stage="policy")
    raise ConfigError(f"invalid policy {text!r}; expected 'stochastic' or 'threshold:<kappa>'", stage="policy")


def changed_fraction(original: LabelVector, perturbed: LabelVector) -> float:
    """Share of rows whose prediction differs."""
    if original.n != perturbed.n:
        raise DataError(f"label vectors differ in length: {original.n} vs {perturbed.n}", stage="policy")
    return int(np.count_nonzero(original.labels != perturbed.labels)) / original.n


def evaluate_policy(policy: CounterfactualPolicy, p: float, rng: np.random.Generator) -> int:
    """
    Indicator of a counterfactual.

    The stochastic variant consumes exactly one uniform draw per call; the threshold
    variant consumes none.
    """
    if policy.variant == "stochastic":
        return int(rng.random() < p)
    return int(p > policy.kappa)
