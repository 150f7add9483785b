from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from ..explain.importance import StationaryConfig
from ..explain.policy import CounterfactualPolicy, parse_policy
from ..models.forest import ForestConfig
from ..simulation.simgen import Scenario


class RunConfig(BaseModel):
    """Everything needed to run, and replay, one CLI invocation."""

    subcommand: Literal["explain", "simulate", "evaluate", "pipeline"] = "explain"

    # Inputs
    data: Optional[str] = Field(None, description="Dataset CSV")
    labels: Optional[str] = Field(None, description="Name of the label column in the CSV")
    has_header: bool = True
    model: Optional[str] = Field(None, description="Forest JSON written by dump_forest")
    model_command: Optional[str] = Field(None, description="Command line of an external model speaking cpath/1")
    graph: Optional[str] = Field(None, description="Knowledge-graph edge list; complete graph when omitted")

    # Path sampling
    policy: str = "stochastic"
    n_iter: int = Field(1000, ge=1)
    k: int = Field(4, ge=1)
    seed: int = Field(0, ge=0)
    importance: Literal["fraction", "stationary", "both"] = "both"
    adjacent: bool = False
    stationary: StationaryConfig = StationaryConfig()
    forest: ForestConfig = ForestConfig()
    threads: Optional[int] = Field(None, ge=1)

    # Outputs
    out: Optional[str] = None
    dot_out: Optional[str] = None
    paths_out: Optional[str] = None
    presence_out: Optional[str] = None
    model_out: Optional[str] = None

    # simulate / pipeline
    scenario: Scenario = "cond-dep-1"
    n_noise: int = Field(2, ge=0)
    n_rows: int = Field(100, ge=1)
    m: int = Field(1, ge=1)
    graph_out: Optional[str] = None
    out_dir: Optional[str] = None
    runs: int = Field(1, ge=1, description="pipeline runs on consecutive seeds")

    # evaluate / pipeline
    explainer: Literal["cpath", "pfi", "gini"] = "cpath"
    metric: str = "coverage"
    repeats: int = Field(1, ge=1)
    signal: Optional[List[str]] = None
    pfi_repeats: int = Field(10, ge=1)
    samples: int = Field(100, ge=1)
    sigma: float = Field(0.1, gt=0.0)
    infidelity_form: Literal["squared", "raw"] = "squared"

    @field_validator("policy")
    @classmethod
    def _valid_policy(cls, value: str) -> str:
        return str(parse_policy(value))

    @field_validator("metric")
    @classmethod
    def _valid_metric(cls, value: str) -> str:
        if value in ("correlation", "coverage", "infidelity"):
            return value
        if value.startswith("sensitivity:") and value.split(":", 1)[1].isdigit() and int(value.split(":", 1)[1]) >= 1:
            return value
        raise ValueError(f"unknown metric {value!r}; expected correlation, coverage, sensitivity:<n> or infidelity")

    @model_validator(mode="after")
    def _consistent(self) -> "RunConfig":
        if self.model and self.model_command:
            raise ValueError("--model and --model-command are mutually exclusive")
        if self.subcommand == "explain":
            if not self.data:
                raise ValueError("explain needs --data")
            if not (self.model or self.model_command or self.labels):
                raise ValueError("explain needs --model, --model-command or --labels to train a forest")
        if self.subcommand == "simulate" and not self.out:
            raise ValueError("simulate needs --out")
        if self.subcommand == "evaluate" and self.data and not self.labels:
            raise ValueError("evaluate on a CSV needs --labels")
        return self

    def counterfactual_policy(self) -> CounterfactualPolicy:
        return parse_policy(self.policy)

    def sensitivity_n(self) -> Optional[int]:
        if self.metric.startswith("sensitivity:"):
            return int(self.metric.split(":", 1)[1])
        return None

    def for_replay(self) -> "RunConfig":
        """Same inputs, no output files."""
        return self.model_copy(update={
            "out": None, "dot_out": None, "paths_out": None, "presence_out": None, "model_out": None
        })
