"""Run manifests written next to every output file"""
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

import config
from utils.io import atomic_write_text

MANIFEST_SCHEMA = "run-manifest-v1"


class RunManifest(BaseModel):
    """Everything needed to regenerate an output; timestamps live only here"""
    schema_name: str = Field(MANIFEST_SCHEMA, alias="schema")
    subcommand: str
    argv: List[str] = Field(default_factory=list)
    config: Dict[str, Any] = Field(default_factory=dict, description="resolved parameters and QuadConfig")
    seed: int
    tool_version: str = Field(default_factory=lambda: config.TOOL_VERSION)
    outputs: List[str] = Field(default_factory=list)
    exit_code: Optional[int] = None
    started_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished_at: Optional[str] = None

    model_config = {"populate_by_name": True}

    def finish(self, exit_code: int) -> "RunManifest":
        self.exit_code = exit_code
        self.finished_at = datetime.now(timezone.utc).isoformat()
        return self


def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def write_manifest(out: Path, manifest: RunManifest) -> Path:
    return atomic_write_text(manifest_path(out), manifest.model_dump_json(by_alias=True, indent=2) + "\n")
