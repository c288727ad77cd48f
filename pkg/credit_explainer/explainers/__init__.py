from credit_explainer.explainers.ale import AleCurve, RefinementReport, ale_curve, ale_curves, interval_edges, refinement_check
from credit_explainer.explainers.background import (
    Background,
    Provenance,
    full_background,
    sample_background,
    summarize_background,
)
from credit_explainer.explainers.lime_tabular import (
    Discretizer,
    ExplanationEntry,
    LimeConfig,
    LocalExplanation,
    explain_batch,
    explain_instance,
    fit_discretizer,
    fit_surrogate,
    proximity_weights,
    render_table,
    sample_perturbations,
)
from credit_explainer.explainers.shapley import (
    ShapConfig,
    ShapMatrix,
    ShapResult,
    class0_result,
    coalition_weight,
    exact_shapley,
    kernel_shap,
    masked_prediction,
    shap_matrix,
)

__all__ = [
    "AleCurve",
    "Background",
    "Discretizer",
    "ExplanationEntry",
    "LimeConfig",
    "LocalExplanation",
    "Provenance",
    "RefinementReport",
    "ShapConfig",
    "ShapMatrix",
    "ShapResult",
    "ale_curve",
    "ale_curves",
    "class0_result",
    "coalition_weight",
    "exact_shapley",
    "explain_batch",
    "explain_instance",
    "fit_discretizer",
    "fit_surrogate",
    "full_background",
    "interval_edges",
    "kernel_shap",
    "masked_prediction",
    "proximity_weights",
    "refinement_check",
    "render_table",
    "sample_background",
    "sample_perturbations",
    "shap_matrix",
    "summarize_background",
]
