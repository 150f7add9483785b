"""
Run artifacts: DOT graph summaries, path exports and explain reports.
"""
import hashlib
import io
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import graphviz
import numpy as np
import pandas as pd
from pydantic import BaseModel

from ..exceptions import DataError
from ..explain.importance import ImportanceVector, TransitionMatrix
from ..explain.pathgen import CounterfactualPath, PathSet

PATHS_SCHEMA = "cpath-paths/1"
REPORT_SCHEMA = "cpath-report/1"


def export_dot(T: TransitionMatrix, importance: Optional[ImportanceVector], names: Sequence[str]) -> str:
    """
    Directed graph of the transition matrix.

    Nodes are labelled `name (score)`, edges carry their integer weight; zero-weight
    edges are omitted. Nodes appear by index and edges in lexicographic order.
    """
    if len(names) != T.p or (importance is not None and len(importance.scores) != T.p):
        raise DataError(f"dimension mismatch: {T.p} features, {len(names)} names", stage="export")
    dot = graphviz.Digraph(name="cpath")
    for j, name in enumerate(names):
        label = f"{name} ({importance.scores[j]:.3f})" if importance is not None else str(name)
        dot.node(str(j), label=label)
    for u, v in zip(*np.nonzero(T.T)):
        dot.edge(str(u), str(v), label=str(int(T.T[u, v])))
    return dot.source


def export_paths_json(paths: PathSet, names: Sequence[str]) -> str:
    if len(names) != paths.p:
        raise DataError(f"{len(names)} names for {paths.p} features", stage="export")
    document = {
        "schema": PATHS_SCHEMA,
        "k": paths.k,
        "n_iter": paths.n_iter,
        "p": paths.p,
        "non_triggered_walks": paths.attempts_log,
        "features": list(names),
        "paths": [
            {
                "vertices": list(path.vertices),
                "features": [names[v] for v in path.vertices],
                "swap_trace": list(path.swap_trace)
            }
            for path in paths.paths
        ]
    }
    return json.dumps(document, indent=2)


def parse_paths_json(text: str) -> PathSet:
    try:
        document = json.loads(text)
        if document.get("schema") != PATHS_SCHEMA:
            raise ValueError(f"unexpected schema {document.get('schema')!r}")
        return PathSet(
            paths=tuple(
                CounterfactualPath(vertices=tuple(item["vertices"]), swap_trace=tuple(item["swap_trace"]))
                for item in document["paths"]
            ),
            n_iter=document["n_iter"],
            k=document["k"],
            p=document.get("p", len(document.get("features", [])) or 1),
            attempts_log=document.get("non_triggered_walks", 0)
        )
    except (KeyError, TypeError, ValueError) as e:
        raise DataError(f"invalid paths document: {e}", stage="export")


def export_presence_matrix(paths: PathSet, names: Sequence[str]) -> str:
    """One 0/1 row per stored path marking which features it visits."""
    matrix = np.zeros((len(paths), paths.p), dtype=np.int64)
    for i, path in enumerate(paths.paths):
        matrix[i, list(path.vertices)] = 1
    buffer = io.StringIO()
    pd.DataFrame(matrix, columns=list(names)).to_csv(buffer, index=False)
    return buffer.getvalue()


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(config: BaseModel) -> str:
    return hashlib.sha256(canonical_json(config.model_dump(mode="json")).encode("utf-8")).hexdigest()


class Provenance(BaseModel):
    seed: int
    config_hash: str
    model_fingerprint: Optional[str] = None
    config: Dict[str, Any]
    timestamp: str


class ExplainReport(BaseModel):
    schema_id: str = REPORT_SCHEMA
    status: str = "ok"
    diagnostics: List[str] = []
    features: List[str]
    importance: Dict[str, Optional[List[float]]]
    stationary_residual: Optional[float] = None
    transition_matrix: List[List[int]]
    paths: Dict[str, Any]
    first_vertex_swaps: List[Optional[float]]
    provenance: Provenance

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def read(cls, path: Union[str, Path]) -> "ExplainReport":
        try:
            return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise DataError(f"unreadable report {path}: {e}", stage="replay")


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")
