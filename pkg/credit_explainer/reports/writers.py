import logging
from pathlib import Path

from pydantic import BaseModel

from credit_explainer.store import ArtifactCRUD, TableCRUD

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)


def view_stem(model: str, explainer: str, view: str) -> str:
    return f"{model}_{explainer}_{view}"


def write_view(data: BaseModel, directory: str | Path, model: str, explainer: str, view: str) -> dict[str, Path]:
    """Write a plot-ready view as `{model}_{explainer}_{view}.json` and, when it is tabular, `.csv`."""
    stem = view_stem(model, explainer, view)
    json_store = ArtifactCRUD(type(data), directory)
    json_store.create_resource(stem, data)
    paths = {"json": json_store.path_for(stem)}
    if hasattr(data, "to_frame"):
        paths["csv"] = TableCRUD(directory).create_resource(stem, data.to_frame())
    logger.info(f"📝 Wrote {view} view for {model}/{explainer} to {directory}")
    return paths
