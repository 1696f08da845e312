"""Atomic file output and versioned CSV/JSON writers"""
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Union

import pandas as pd

PathLike = Union[str, Path]


def atomic_write_text(path: PathLike, text: str) -> Path:
    """Write ``text`` to a sibling temp file, then rename it over ``path``"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def atomic_write_bytes(path: PathLike, payload: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_header(table: str, meta: Optional[Dict[str, Any]] = None) -> str:
    """``# fracmin <table>-v1 key=value ...`` header comment line"""
    parts = [f"# fracmin {table}-v1"]
    for key in sorted(meta or {}):
        parts.append(f"{key}={meta[key]}")
    return " ".join(parts) + "\n"


def render_csv(frame: pd.DataFrame, table: str, meta: Optional[Dict[str, Any]] = None) -> str:
    """Header comment followed by the frame with fixed float formatting"""
    return csv_header(table, meta) + frame.to_csv(index=False, float_format="%.12g", lineterminator="\n")


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def dumps(payload: Any) -> str:
    """Canonical JSON: sorted keys, no NaN, stable separators"""
    return json.dumps(payload, sort_keys=True, allow_nan=False, separators=(",", ":"))


def render_jsonl(records: Iterable[Any]) -> str:
    return "".join(dumps(r) + "\n" for r in records)
