from credit_explainer.reports.export import (
    ByFeature,
    ByOutput,
    dependence_data,
    force_data,
    importance_compare,
    interaction_scores,
    summary_data,
)
from credit_explainer.reports.schemas import DependenceData, ForceData, ImportanceComparison, SummaryData
from credit_explainer.reports.writers import view_stem, write_view

__all__ = [
    "ByFeature",
    "ByOutput",
    "DependenceData",
    "ForceData",
    "ImportanceComparison",
    "SummaryData",
    "dependence_data",
    "force_data",
    "importance_compare",
    "interaction_scores",
    "summary_data",
    "view_stem",
    "write_view",
]
