"""Declarative experiment configuration (JSON) and its validation."""

from __future__ import annotations

import json
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import measures as M
from .pipelines import SCHEMES, STRATEGIES


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field path."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DriftSpec(_Strict):
    position: int = Field(ge=1)
    magnitude: float = Field(gt=0)


class CsvSourceSpec(_Strict):
    type: Literal["csv"]
    path: str
    target_col: int = -1
    has_header: bool = False


class AbruptSourceSpec(_Strict):
    type: Literal["abrupt"]
    n_features: int = Field(ge=1)
    n_total: int = Field(ge=1)
    magnitude: float = Field(default=3.0, gt=0)
    drifts: list[DriftSpec] = []


class HyperplaneSourceSpec(_Strict):
    type: Literal["hyperplane"]
    n_features: int = Field(ge=2)
    n_total: int = Field(ge=1)
    rotation_rate: float = Field(default=0.0, ge=0)
    drifts: list[DriftSpec] = []


SourceSpec = Annotated[Union[CsvSourceSpec, AbruptSourceSpec, HyperplaneSourceSpec],
                       Field(discriminator="type")]


class ModelSpec(_Strict):
    kind: Literal["perceptron", "gaussian_nb", "majority"]
    name: Optional[str] = None
    params: dict[str, float] = {}


class DetectorSpec(_Strict):
    kind: Literal["page_hinkley", "adwin"]
    params: dict[str, float] = {}


class SelectorSpec(_Strict):
    kind: Literal["ofs"] = "ofs"
    k: int = Field(ge=1)
    learning_rate: float = Field(default=0.2, gt=0)
    regularization: float = Field(default=0.01, gt=0)


class PipelineSpec(_Strict):
    strategy: Literal[STRATEGIES] = "prequential"
    batch_size: int = Field(default=1, ge=1)
    n_pretrain: int = Field(default=0, ge=0)
    test_interval: int = Field(default=100, ge=1)
    holdout_size: int = Field(default=100, ge=1)
    k: int = Field(default=10, ge=2)
    scheme: Literal[SCHEMES] = "cross"
    w_agg: int = Field(default=25, ge=1)
    fading_factor: float = Field(default=0.99, gt=0, le=1)
    reset_after_drift: bool = False
    standardize: bool = False


class EvaluationSpec(_Strict):
    reference_measure: Literal[M.LOSS_MEASURES] = "zero_one"
    noise_std: float = Field(default=1.0, ge=0)
    noise_samples: int = Field(default=15, ge=1)
    zero_division: float = 0.0
    known_drifts: Optional[list[int]] = None
    tolerance: int = Field(default=500, ge=0)
    drift_window: int = Field(default=10, ge=1)
    fss_window: int = Field(default=10, ge=2)


class ExperimentConfig(_Strict):
    source: SourceSpec
    models: list[ModelSpec] = Field(min_length=1)
    detector: Optional[DetectorSpec] = None
    selector: Optional[SelectorSpec] = None
    pipeline: PipelineSpec = PipelineSpec()
    measures: list[str] = Field(default=["accuracy"], min_length=1)
    evaluation: EvaluationSpec = EvaluationSpec()
    output: str = "results"
    seed: int = 0

    @model_validator(mode="after")
    def _consistency(self):
        for i, mid in enumerate(self.measures):
            if mid not in M.MEASURES:
                raise ValueError(f"measures.{i}: unknown measure id {mid!r}")
        scopes = {M.MEASURES[m].scope for m in self.measures}
        if scopes & {"drift", "detection"} and not self.known_drift_positions():
            raise ValueError("measures: drift and detection measures need known drifts "
                             "(evaluation.known_drifts or generator drifts)")
        if "detection" in scopes and self.detector is None:
            raise ValueError("measures: detection measures need a detector")
        if "selection" in scopes and self.selector is None:
            raise ValueError("measures: selection measures need a selector")
        if self.detector is not None and self.pipeline.strategy == "holdout":
            raise ValueError("detector: not supported with the holdout strategy")
        if self.pipeline.strategy == "kfold" and len(self.models) != 1:
            raise ValueError("models: kfold evaluates exactly one model prototype")
        names = self.model_names()
        if len(set(names)) != len(names):
            raise ValueError(f"models: duplicate model names {names}")
        if self.selector is not None and getattr(self.source, "n_features", None) is not None:
            if self.selector.k > self.source.n_features:
                raise ValueError("selector.k: larger than the number of features")
        return self

    def known_drift_positions(self) -> list[int]:
        if self.evaluation.known_drifts is not None:
            return list(self.evaluation.known_drifts)
        return [d.position for d in getattr(self.source, "drifts", [])]

    def model_names(self) -> list[str]:
        return [m.name or m.kind for m in self.models]

    def canonical(self) -> dict:
        """The validated config with every default filled in."""
        return self.model_dump(mode="json")


def _format(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        msg = e["msg"]
        if e["type"] == "extra_forbidden":
            msg = "unknown key"
        elif e["type"] == "value_error":
            # model-level checks already name their field
            lines.append(msg.removeprefix("Value error, "))
            continue
        lines.append(f"{path}: {msg}")
    return "; ".join(lines)


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format(exc)) from None


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
