"""
Transition-matrix aggregation of counterfactual paths and the importance estimators.
"""
import math
from typing import Literal, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..exceptions import ConvergenceError, GraphError, NoCounterfactualsError
from .pathgen import PathSet


class TransitionMatrix(BaseModel):
    """p x p integer edge weights accumulated from paths of maximal length k."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    T: np.ndarray
    k: int

    @property
    def p(self) -> int:
        return self.T.shape[0]

    def total(self) -> int:
        return int(self.T.sum())

    def is_zero(self) -> bool:
        return not self.T.any()

    def __add__(self, other: "TransitionMatrix") -> "TransitionMatrix":
        return TransitionMatrix(T=self.T + other.T, k=self.k)


class ImportanceVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    scores: tuple
    method: Literal["fraction", "adjacent", "stationary"]
    residual: Optional[float] = None
    iterations: Optional[int] = None

    def as_array(self) -> np.ndarray:
        return np.asarray(self.scores, dtype=np.float64)


class StationaryConfig(BaseModel):
    damping: float = Field(0.01, ge=0.0, le=1.0, description="Uniform teleport weight")
    tol: float = Field(1e-10, gt=0.0)
    max_iters: int = Field(10_000, ge=1)


def build_transition_matrix(paths: PathSet) -> TransitionMatrix:
    """
    Every edge of a path of length l gains weight k - l + 1; a single-vertex path puts that
    weight on its self-loop.
    """
    k, p = paths.k, paths.p
    T = np.zeros((p, p), dtype=np.int64)
    for path in paths.paths:
        v = path.vertices
        if any(not 0 <= u < p for u in v):
            raise GraphError(f"path {v} references a vertex outside 0..{p - 1}", stage="importance")
        weight = k - len(v) + 1
        if len(v) == 1:
            T[v[0], v[0]] += weight
        for a, b in zip(v[:-1], v[1:]):
            T[a, b] += weight
    return TransitionMatrix(T=T, k=k)


def _require_paths(T: TransitionMatrix) -> None:
    if T.is_zero():
        raise NoCounterfactualsError("no counterfactual paths were found; importance is undefined")


def _normalize(weights: np.ndarray) -> tuple:
    total = math.fsum(weights)
    return tuple(float(w) / total for w in weights)


def importance_fraction(T: TransitionMatrix, mode: Literal["incoming", "adjacent"] = "incoming") -> ImportanceVector:
    """
    Share of the total edge weight attributed to each feature.

    `incoming` sums the weights of arcs entering the feature (column sums, self-loops included).
    `adjacent` sums arcs entering or leaving it, counting a self-loop once.
    """
    _require_paths(T)
    W = T.T
    column = W.sum(axis=0)
    if mode == "incoming":
        return ImportanceVector(scores=_normalize(column), method="fraction")
    touching = column + W.sum(axis=1) - np.diag(W)
    return ImportanceVector(scores=_normalize(touching), method="adjacent")


def importance_stationary(T: TransitionMatrix, config: Optional[StationaryConfig] = None) -> ImportanceVector:
    """
    Stationary distribution of the row-normalized transition matrix.

    All-zero rows become uniform rows and the chain is mixed with uniform teleportation
    (weight `damping`) before power iteration from the uniform distribution.
    """
    config = config or StationaryConfig()
    _require_paths(T)
    p = T.p
    weights = T.T.astype(np.float64)
    row_sums = weights.sum(axis=1, keepdims=True)
    P = np.where(row_sums > 0, weights / np.where(row_sums > 0, row_sums, 1.0), 1.0 / p)
    P = (1.0 - config.damping) * P + config.damping / p

    pi = np.full(p, 1.0 / p)
    residual = math.inf
    for iteration in range(1, config.max_iters + 1):
        nxt = pi @ P
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - pi).sum())
        pi = nxt
        if residual < config.tol:
            logger.debug(f"Stationary distribution converged after {iteration} iterations (residual {residual:.3e})")
            return ImportanceVector(scores=tuple(pi.tolist()), method="stationary", residual=residual, iterations=iteration)
    logger.warning(f"Stationary distribution did not converge: residual {residual:.3e} after {config.max_iters} iterations")
    raise ConvergenceError(
        f"power iteration did not converge within {config.max_iters} iterations (residual {residual:.3e})",
        residual=residual
    )
