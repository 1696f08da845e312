"""geomset-v1 documents and gridset-v1 raster dumps"""
import json
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError

from geometry.farfield import FarField
from geometry.sets import GeomSet, GeomSetBase
from utils.errors import MalformedInputError
from utils.io import atomic_write_bytes, atomic_write_text

GEOMSET_SCHEMA = "geomset-v1"
GRID_SCHEMA = "gridset-v1"

_SET_ADAPTER = TypeAdapter(GeomSet)


class CylinderSpec(BaseModel):
    """Excluded cylinder B'_radius x (-depth, 0] that a candidate must avoid"""
    model_config = ConfigDict(frozen=True)

    radius: float = Field(2.0, gt=0)
    depth: float = Field(2.0, gt=0)


class GeomSetDocument(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_: Literal["geomset-v1"] = Field(GEOMSET_SCHEMA, alias="schema")
    set: GeomSet
    far_field: Optional[FarField] = None
    cylinder: Optional[CylinderSpec] = None


def parse_set(payload: Union[str, Dict[str, Any]]) -> GeomSetBase:
    """GeomSet from a JSON string or an already-decoded expression tree"""
    try:
        if isinstance(payload, str):
            return _SET_ADAPTER.validate_json(payload)
        return _SET_ADAPTER.validate_python(payload)
    except ValidationError as exc:
        raise MalformedInputError(f"invalid set expression: {exc.errors()[0]['msg']}") from exc


def set_to_json(geom: GeomSetBase) -> str:
    if _has_callable(geom):
        raise MalformedInputError("sets built on callable profiles cannot be serialized")
    return _SET_ADAPTER.dump_json(geom).decode()


def _has_callable(node: Any) -> bool:
    if isinstance(node, BaseModel):
        if getattr(node, "kind", None) == "callable":
            return True
        return any(_has_callable(getattr(node, name)) for name in type(node).model_fields)
    if isinstance(node, (list, tuple)):
        return any(_has_callable(v) for v in node)
    return False


def load_document(source: Union[str, Path]) -> GeomSetDocument:
    """Read a geomset-v1 document from a path or a JSON string"""
    text = str(source)
    path = Path(text) if not text.lstrip().startswith("{") else None
    try:
        if path is not None:
            text = path.read_text(encoding="utf-8")
        raw = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInputError(f"cannot read geomset document: {exc}") from exc
    if not isinstance(raw, dict) or raw.get("schema") != GEOMSET_SCHEMA:
        raise MalformedInputError(f"expected a {GEOMSET_SCHEMA} document")
    try:
        return GeomSetDocument.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(p) for p in first.get("loc", ()))
        raise MalformedInputError(f"invalid geomset document at {where}: {first['msg']}") from exc


def dump_document(doc: GeomSetDocument) -> str:
    if _has_callable(doc.set):
        raise MalformedInputError("sets built on callable profiles cannot be serialized")
    return doc.model_dump_json(by_alias=True, exclude_none=True)


def write_grid(path: Union[str, Path], grid: np.ndarray, lo: np.ndarray, resolution: float,
               labels: bool = False) -> Tuple[Path, Path]:
    """Flat C-order binary plus ``<path>.json`` header"""
    path = Path(path)
    data = np.ascontiguousarray(grid.astype(np.int8 if labels else np.uint8))
    header = {"schema": GRID_SCHEMA, "shape": list(data.shape), "dtype": str(data.dtype),
              "order": "C", "lo": [float(v) for v in np.asarray(lo)], "resolution": float(resolution)}
    bin_path = atomic_write_bytes(path, data.tobytes())
    head_path = atomic_write_text(path.with_suffix(path.suffix + ".json"), json.dumps(header, sort_keys=True))
    return bin_path, head_path


def read_grid(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray, float]:
    path = Path(path)
    try:
        header = json.loads(path.with_suffix(path.suffix + ".json").read_text(encoding="utf-8"))
        if header.get("schema") != GRID_SCHEMA:
            raise MalformedInputError(f"expected a {GRID_SCHEMA} header")
        data = np.frombuffer(path.read_bytes(), dtype=np.dtype(header["dtype"]))
        grid = data.reshape(header["shape"])
    except (OSError, KeyError, ValueError) as exc:
        raise MalformedInputError(f"cannot read grid dump: {exc}") from exc
    return grid, np.asarray(header["lo"], dtype=float), float(header["resolution"])
