import pandas as pd
from pydantic import BaseModel, ConfigDict, Field


class SummaryFeature(BaseModel):
    feature: str
    feature_index: int
    rank: int = Field(..., description="0 is the most important feature")
    mean_abs_phi: float


class SummaryPoint(BaseModel):
    instance: int
    rank: int
    feature: str
    phi: float
    normalized_value: float = Field(..., ge=0.0, le=1.0, description="Min-max scaled feature value for colouring")


class SummaryData(BaseModel):
    """Beeswarm-ready global view: top features by mean |phi| plus one point per (instance, feature)"""

    top_n: int
    features: list[SummaryFeature]
    points: list[SummaryPoint]
    max_residual: float = Field(0.0, description="Largest |base + Σphi - fx| seen while exporting")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "top_n": 20,
                "features": [{"feature": "recoveries", "feature_index": 9, "rank": 0, "mean_abs_phi": 0.083}],
                "points": [{"instance": 0, "rank": 0, "feature": "recoveries", "phi": 0.21, "normalized_value": 0.4}],
                "max_residual": 2.2e-16,
            }
        }
    )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([p.model_dump() for p in self.points], columns=list(SummaryPoint.model_fields))


class DependencePoint(BaseModel):
    instance: int
    x_j: float
    phi_j: float
    x_k: float


class DependenceData(BaseModel):
    """Scatter of phi_j against x_j coloured by the strongest interaction partner x_k"""

    feature: str
    feature_index: int
    partner: str
    partner_index: int
    partner_scores: dict[str, float] = Field(..., description="Candidate -> count-weighted |within-decile correlation|")
    points: list[DependencePoint]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([p.model_dump() for p in self.points], columns=list(DependencePoint.model_fields))


class Contribution(BaseModel):
    feature: str
    feature_index: int
    phi: float


class ForceInstance(BaseModel):
    instance: int
    base_value: float
    fx: float
    contributions: list[Contribution] = Field(..., description="Sorted by |phi| descending, ties by feature index")


class ForceData(BaseModel):
    """Per-instance additive force layouts plus the order in which they are stacked"""

    sort: str = Field(..., description="'output' or 'feature:<name>'")
    order: list[int] = Field(..., description="Instance ids in stacking order")
    instances: list[ForceInstance]
    trace: list[tuple[float, float]] | None = Field(None, description="(x_j, phi_j) in stacking order for feature sorts")
    trace_rank_correlation: float | None = None

    def to_frame(self) -> pd.DataFrame:
        by_id = {f.instance: f for f in self.instances}
        rows = []
        for position, instance in enumerate(self.order):
            force = by_id[instance]
            for c in force.contributions:
                rows.append(
                    {
                        "position": position,
                        "instance": instance,
                        "base_value": force.base_value,
                        "fx": force.fx,
                        "feature": c.feature,
                        "phi": c.phi,
                    }
                )
        return pd.DataFrame(rows, columns=["position", "instance", "base_value", "fx", "feature", "phi"])


class ComparisonRow(BaseModel):
    feature: str
    gain: float
    gain_rank: int | None
    mean_abs_phi: float
    shap_rank: int | None


class ImportanceComparison(BaseModel):
    """Information-gain importance next to SHAP mean |phi| for the same tree model"""

    top_n: int
    rows: list[ComparisonRow]
    jaccard: float = Field(..., ge=0.0, le=1.0)
    spearman: float | None = Field(None, description="Rank correlation on the union; None when undefined")
    gain_top_share: float = Field(..., description="Normalised gain of the top gain feature")
    shap_top_share: float = Field(..., description="Top feature's share of the top-five mean |phi| mass")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.model_dump() for r in self.rows], columns=list(ComparisonRow.model_fields))


class ConsistencyReport(BaseModel):
    """Top-n mean |phi| feature sets from a small and a large explanation batch"""

    small: int
    large: int
    top_n: int
    jaccard: float = Field(..., ge=0.0, le=1.0)
    top_small: list[str]
    top_large: list[str]


class BackgroundBenchReport(BaseModel):
    """Summarised versus raw background on the same instances"""

    instances: int
    k: int
    raw: int
    seconds_summarised: float
    seconds_raw: float
    speedup: float
    top_n: int
    jaccard: float = Field(..., ge=0.0, le=1.0)
