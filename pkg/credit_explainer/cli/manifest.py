import hashlib
import logging
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field

from credit_explainer.store import ArtifactCRUD

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

MANIFEST_VERSION = 1
TRACKED_PACKAGES = ("credit_explainer", "numpy", "scipy", "pandas", "pydantic", "joblib")


class Manifest(BaseModel):
    """What a command read, wrote and ran with"""

    manifest_version: int = Field(MANIFEST_VERSION)
    command: str
    argv: list[str]
    status: Literal["ok", "error"] = "ok"
    config_hash: str
    config: dict = Field(default_factory=dict, description="Flat dotted run configuration")
    inputs: dict[str, str] = Field(default_factory=dict, description="Input path -> sha256")
    outputs: dict[str, str] = Field(default_factory=dict, description="Output path -> sha256")
    versions: dict[str, str] = Field(default_factory=dict)
    timings: dict[str, float] = Field(default_factory=dict, description="Stage -> wall-clock seconds")
    started_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    error: dict | None = None


class ManifestCRUD(ArtifactCRUD[Manifest]):
    resource_model = Manifest


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def hash_paths(paths: list[Path]) -> dict[str, str]:
    hashed = {}
    for path in paths:
        if Path(path).is_file():
            hashed[str(path)] = file_sha256(path)
    return dict(sorted(hashed.items()))


def package_versions() -> dict[str, str]:
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def manifest_store(root: str | Path) -> ManifestCRUD:
    return ManifestCRUD(Manifest, Path(root) / "manifests")
