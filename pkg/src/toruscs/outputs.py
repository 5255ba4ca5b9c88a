"""Deterministic CSV / JSON rendering and all-or-nothing file commits."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__


def fmt(value) -> str:
    """17 significant digits for floats, plain text for integers."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.16e}"


def metadata(config: dict) -> dict:
    return {"artifact": "toruscs", "version": __version__, "config": config}


def csv_text(header: Sequence[str], rows: Iterable[Sequence], config: dict) -> str:
    meta = json.dumps(metadata(config), sort_keys=True, separators=(",", ":"))
    lines = [f"# {meta}", ",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\r\n".join(lines) + "\r\n"


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isfinite(obj):
            return float(fmt(obj))
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def json_text(payload: dict, config: dict) -> str:
    doc = {"metadata": metadata(config), **_jsonable(payload)}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


class OutputSet:
    """Collects rendered files and writes them only when the command succeeds."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def commit(self) -> list[Path]:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, text in self.files.items():
            path = self.out_dir / name
            tmp = path.with_suffix(path.suffix + ".tmp")
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            tmp.replace(path)
            written.append(path)
        return written
