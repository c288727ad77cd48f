from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Callable, Generic, TypeVar

import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

V = TypeVar("V", bound=BaseModel)


class ArtifactCRUD(Generic[V]):
    """
    Typed access to a directory of JSON artifacts, one pydantic document per file.

    Resource ids are file stems; documents are written with a fixed indent and
    key order so equal content gives byte-identical files.
    """

    resource_model: type[V]
    suffix = ".json"

    def __init__(self, resource_model: type[V], directory: str | Path) -> None:
        self.resource_model = resource_model
        self.directory = Path(directory)

    def path_for(self, resource_id: str) -> Path:
        return self.directory / f"{resource_id}{self.suffix}"

    def create_resource(self, resource_id: str, data: V | dict[str, Any]) -> V:
        document = data if isinstance(data, self.resource_model) else self.resource_model.model_validate(data)
        path = self.path_for(resource_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(document.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.debug(f"wrote {path}")
        return document

    def get_resource(self, resource_id: str) -> V | None:
        path = self.path_for(resource_id)
        if not path.exists():
            return None
        return self.resource_model.model_validate_json(path.read_text(encoding="utf-8"))

    def list_resource(
        self,
        where: Callable[[V], bool] | None = None,
        limit: int | None = None,
    ) -> list[tuple[str, V]]:
        if not self.directory.exists():
            return []
        resources = []
        for path in sorted(self.directory.glob(f"*{self.suffix}")):
            document = self.resource_model.model_validate_json(path.read_text(encoding="utf-8"))
            if where is None or where(document):
                resources.append((path.stem, document))
        return resources[:limit] if limit is not None else resources

    def delete_resource(self, resource_id: str) -> V | None:
        document = self.get_resource(resource_id)
        if document is not None:
            self.path_for(resource_id).unlink()
        return document


class TableCRUD:
    """CSV tables under one directory, read and written through pandas."""

    suffix = ".csv"

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)

    def path_for(self, resource_id: str) -> Path:
        return self.directory / f"{resource_id}{self.suffix}"

    def create_resource(self, resource_id: str, frame: pd.DataFrame) -> Path:
        path = self.path_for(resource_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n", float_format="%.17g")
        return path

    def get_resource(self, resource_id: str) -> pd.DataFrame | None:
        path = self.path_for(resource_id)
        if not path.exists():
            return None
        return pd.read_csv(path, float_precision="round_trip")
