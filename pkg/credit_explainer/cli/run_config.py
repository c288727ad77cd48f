import hashlib
import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

from credit_explainer.explainers.lime_tabular import LimeConfig
from credit_explainer.explainers.shapley import ShapConfig


class PrepSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sparse_threshold: float = Field(0.9, gt=0.0, le=1.0, description="Drop columns missing in more than this share")
    r_max: float = Field(0.9, gt=0.0, le=1.0, description="Absolute Pearson correlation cut-off")
    alpha: float = Field(0.05, gt=0.0, lt=1.0, description="Chi-square significance level")
    test_fraction: float = Field(0.2, gt=0.0, lt=1.0)


class LogisticSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    l2: float = Field(1.0, ge=0.0)


class ForestSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_trees: int = Field(500, ge=1)
    max_depth: int = Field(20, ge=1)
    max_features: int | Literal["sqrt"] | None = "sqrt"
    bootstrap: bool = True


class BoostedSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_rounds: int = Field(100, ge=0)
    max_depth: int = Field(4, ge=1)
    learning_rate: float = Field(0.1, gt=0.0)


class SvmSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    c: float = Field(1.0, gt=0.0)
    epochs: int = Field(20, ge=1)
    calibration_fraction: float = Field(0.2, ge=0.0, lt=1.0)
    probability_method: Literal["platt", "sigmoid"] = "platt"


class MlpSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    layers: list[int] = Field(default_factory=lambda: [35, 35])
    epochs: int = Field(20, ge=0)
    batch_size: int = Field(128, ge=1)
    learning_rate: float = Field(1e-3, gt=0.0)
    init: Literal["he", "zeros"] = "he"


class ModelSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    logistic: LogisticSettings = Field(default_factory=LogisticSettings)
    forest: ForestSettings = Field(default_factory=ForestSettings)
    boosted: BoostedSettings = Field(default_factory=BoostedSettings)
    svm_linear: SvmSettings = Field(default_factory=SvmSettings)
    mlp: MlpSettings = Field(default_factory=MlpSettings)


class AleSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_intervals: int = Field(20, ge=2)
    link: Literal["identity", "logit"] = "identity"
    features: list[str] | None = Field(None, description="Encoded feature names; None means every feature")


class ReportSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    top_n: int = Field(20, ge=1)


class RunConfig(BaseModel):
    """
    Everything a run depends on besides its input files. Serialised as flat
    dotted keys ("lime.top_k": 10); the sha256 of that form identifies the run.
    """

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(7, ge=0, description="Master seed; lime.seed and shap.seed are derived from it")
    jobs: int = Field(1, ge=1)
    prep: PrepSettings = Field(default_factory=PrepSettings)
    models: ModelSettings = Field(default_factory=ModelSettings)
    lime: LimeConfig = Field(default_factory=LimeConfig)
    shap: ShapConfig = Field(default_factory=ShapConfig)
    ale: AleSettings = Field(default_factory=AleSettings)
    report: ReportSettings = Field(default_factory=ReportSettings)

    @classmethod
    def from_flat(cls, flat: dict[str, Any]) -> "RunConfig":
        nested: dict[str, Any] = {}
        for key, value in flat.items():
            *parents, leaf = key.split(".")
            node = nested
            for part in parents:
                node = node.setdefault(part, {})
            node[leaf] = value
        return cls.model_validate(nested)

    def to_flat(self) -> dict[str, Any]:
        flat: dict[str, Any] = {}

        def walk(prefix: str, value: Any) -> None:
            if isinstance(value, dict):
                for key, inner in value.items():
                    walk(f"{prefix}.{key}" if prefix else key, inner)
            else:
                flat[prefix] = value

        walk("", self.model_dump(mode="json"))
        return flat

    def with_overrides(self, overrides: dict[str, Any]) -> "RunConfig":
        """Apply flat dotted overrides; None values leave the setting untouched."""
        merged = self.to_flat()
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_flat(merged)

    def config_hash(self) -> str:
        payload = json.dumps(self.to_flat(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls()
        with open(path, encoding="utf-8") as fh:
            return cls.from_flat(json.load(fh))
