from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from loguru import logger

from ..config.run_config import RunConfig
from ..data.tabular import Dataset, LabelVector, load_csv
from ..exceptions import ConfigError, DataError
from ..explain.importance import (
    ImportanceVector,
    TransitionMatrix,
    build_transition_matrix,
    importance_fraction,
    importance_stationary
)
from ..explain.pathgen import PathSet, generate_paths
from ..export.artifacts import (
    ExplainReport,
    Provenance,
    config_hash,
    export_dot,
    export_paths_json,
    export_presence_matrix,
    utc_timestamp
)
from ..graph.featgraph import FeatureGraph, complete_graph, load_knowledge_graph
from ..models.blackbox import BlackBoxModel
from ..models.bridge import spawn_external_model
from ..models.forest import dump_forest, load_forest, train_random_forest
from .base_agent import BaseAgent


def load_model(config: RunConfig, dataset: Dataset, labels: Optional[LabelVector]) -> BlackBoxModel:
    """External command, dumped forest, or a forest trained on the dataset, in that order."""
    if config.model_command:
        return spawn_external_model(config.model_command, p=dataset.p)
    if config.model:
        path = Path(config.model)
        if not path.is_file():
            raise DataError(f"missing model file: {path}", stage="model")
        return load_forest(path.read_text(encoding="utf-8"))
    if labels is None:
        raise ConfigError("no model given and no label column to train one", stage="train")
    forest = train_random_forest(dataset, labels, config.forest)
    if config.model_out:
        Path(config.model_out).write_text(dump_forest(forest), encoding="utf-8")
        logger.info(f"Forest written to {config.model_out}")
    return forest


def load_graph(config: RunConfig, dataset: Dataset) -> FeatureGraph:
    if config.graph:
        return load_knowledge_graph(config.graph, dataset.columns)
    return complete_graph(dataset.p)


def compute_importance(T: TransitionMatrix, config: RunConfig) -> Dict[str, Optional[ImportanceVector]]:
    results: Dict[str, Optional[ImportanceVector]] = {"fraction": None, "stationary": None}
    if config.importance in ("fraction", "both"):
        results["fraction"] = importance_fraction(T)
    if config.importance in ("stationary", "both"):
        results["stationary"] = importance_stationary(T, config.stationary)
    if config.adjacent:
        results["adjacent"] = importance_fraction(T, mode="adjacent")
    return results


def _json_summary(paths: PathSet) -> Dict[str, Any]:
    summary = paths.summary()
    summary["length_histogram"] = {str(length): count for length, count in summary["length_histogram"].items()}
    return summary


def build_report(
    config: RunConfig,
    names: List[str],
    paths: PathSet,
    T: TransitionMatrix,
    importance: Dict[str, Optional[ImportanceVector]],
    fingerprint: str
) -> ExplainReport:
    diagnostics = []
    status = "ok"
    if paths.is_empty():
        status = "no-counterfactuals"
        diagnostics.append(
            f"no walk out of {paths.n_iter} satisfied policy {config.policy} within k={paths.k}; "
            "importance is undefined"
        )
    stationary = importance.get("stationary")
    return ExplainReport(
        status=status,
        diagnostics=diagnostics,
        features=names,
        importance={
            method: list(vector.scores) if vector is not None else None
            for method, vector in importance.items()
        },
        stationary_residual=stationary.residual if stationary is not None else None,
        transition_matrix=T.T.tolist(),
        paths=_json_summary(paths),
        first_vertex_swaps=paths.first_vertex_swaps(),
        provenance=Provenance(
            seed=config.seed,
            config_hash=config_hash(config),
            model_fingerprint=fingerprint,
            config=config.model_dump(mode="json"),
            timestamp=utc_timestamp()
        )
    )


def write_artifacts(
    config: RunConfig,
    report: ExplainReport,
    paths: PathSet,
    T: TransitionMatrix,
    importance: Dict[str, Optional[ImportanceVector]]
) -> None:
    names = report.features
    if config.out:
        report.write(config.out)
        logger.info(f"Report written to {config.out}")
    if config.dot_out:
        shown = importance.get("fraction") or importance.get("stationary")
        Path(config.dot_out).write_text(export_dot(T, shown, names), encoding="utf-8")
    if config.paths_out:
        Path(config.paths_out).write_text(export_paths_json(paths, names), encoding="utf-8")
    if config.presence_out:
        Path(config.presence_out).write_text(export_presence_matrix(paths, names), encoding="utf-8")


def run_explain(config: RunConfig) -> ExplainReport:
    """
    Load data and model, sample counterfactual paths, aggregate them and write the report.

    An empty path set still produces a report, with status `no-counterfactuals`.
    """
    dataset, labels = load_csv(config.data, config.has_header, config.labels)
    model = load_model(config, dataset, labels)
    try:
        graph = load_graph(config, dataset)
        paths = generate_paths(
            model,
            dataset,
            config.counterfactual_policy(),
            graph,
            config.n_iter,
            config.k,
            config.seed,
            threads=config.threads
        )
        T = build_transition_matrix(paths)
        if paths.is_empty():
            logger.warning(f"No counterfactual paths in {config.n_iter} walks")
            importance: Dict[str, Optional[ImportanceVector]] = {"fraction": None, "stationary": None}
        else:
            importance = compute_importance(T, config)
        report = build_report(config, list(dataset.columns), paths, T, importance, model.fingerprint())
    finally:
        model.close()
    write_artifacts(config, report, paths, T, importance)
    return report


def replay(report_path: Union[str, Path], out: Optional[str] = None) -> ExplainReport:
    """Re-run explain from a report's provenance block."""
    original = ExplainReport.read(report_path)
    config = RunConfig.model_validate(original.provenance.config).for_replay()
    if config_hash(RunConfig.model_validate(original.provenance.config)) != original.provenance.config_hash:
        raise ConfigError(f"config hash mismatch in {report_path}; provenance was edited", stage="replay")
    if out:
        config = config.model_copy(update={"out": out})
    report = run_explain(config)
    if report.importance != original.importance or report.transition_matrix != original.transition_matrix:
        logger.warning(f"Replay of {report_path} differs from the recorded result")
    else:
        logger.info(f"Replay of {report_path} reproduced the recorded result")
    return report


class ExplainAgent(BaseAgent):
    def __init__(self):
        super().__init__(
            name="Explain Agent",
            role_description="Samples counterfactual paths against a black-box model and reports global feature importance"
        )

    async def process(self, config: RunConfig) -> Dict[str, Any]:
        """
        Run one explanation.

        Args:
            config (RunConfig): explain configuration

        Returns:
            Dict[str, Any]: the report and a feature ranking
        """
        report = await self.run_stage("explain", run_explain, config)
        ranking = []
        scores = report.importance.get("fraction") or report.importance.get("stationary")
        if scores is not None:
            ranking = [name for _, name in sorted(zip(scores, report.features), key=lambda item: -item[0])]
        self.logger.info(
            f"Explained {len(report.features)} features: {report.paths['n_paths']} paths, status {report.status}"
        )
        return {"report": report, "ranking": ranking, "status": report.status}
