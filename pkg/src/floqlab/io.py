"""CSV artifacts with metadata comment blocks and JSON config sidecars.

Formatting is deterministic: fixed float precision, sorted metadata keys,
no timestamps. Rerunning the same config and seed reproduces every
emitted byte.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .experiments.base import GridMap

_FLOAT_FMT = "%.10g"


class IOError_(RuntimeError):
    pass


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return _FLOAT_FMT % float(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def jsonable(obj):
    """Recursively convert numpy/dataclass values into JSON-encodable ones."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def _meta_lines(meta: dict | None) -> list[str]:
    if not meta:
        return []
    enc = jsonable(meta)
    return [f"# {k}: {json.dumps(enc[k], sort_keys=True)}" for k in sorted(enc)]


def write_columns_csv(path, columns: dict, meta: dict | None = None) -> Path:
    """Column-per-series CSV: `#` metadata block, header row, data rows."""
    path = Path(path)
    names = list(columns)
    if not names:
        raise IOError_("no columns to write")
    arrays = [np.asarray(columns[n]) for n in names]
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise IOError_("columns differ in length")
    lines = _meta_lines(meta)
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(_fmt(a[i]) for a in arrays))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_grid_csv(path, grid: GridMap, meta: dict | None = None) -> Path:
    """2-D grid CSV: first column the row axis, remaining columns the grid.

    The header cell names both axes as row_label/col_label; column headers
    are the col-axis values.
    """
    path = Path(path)
    full_meta = {"value": grid.value_label, **(meta or {}), **grid.meta}
    lines = _meta_lines(full_meta)
    header = [f"{grid.row_label}/{grid.col_label}"]
    header += [_fmt(c) for c in np.asarray(grid.cols)]
    lines.append(",".join(header))
    rows = np.asarray(grid.rows)
    for i in range(len(rows)):
        cells = [_fmt(rows[i])] + [_fmt(v) for v in grid.values[i]]
        lines.append(",".join(cells))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_sidecar(csv_path, resolved_config: dict,
                  extra: dict | None = None) -> Path:
    """JSON sidecar next to a CSV holding the full resolved config.

    The sidecar is itself a loadable config document (JSON is a YAML
    subset), so `floqlab validate <artifact>.csv.json` round-trips.
    """
    csv_path = Path(csv_path)
    side = csv_path.with_name(csv_path.name + ".json")
    payload = jsonable(resolved_config)
    if extra:
        payload = {**payload, "__artifact__": jsonable(
            {"file": csv_path.name, **extra})}
    side.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return side


def read_columns_csv(path):
    """Inverse of write_columns_csv: (meta, columns-of-float-arrays)."""
    meta: dict = {}
    rows: list[list[str]] = []
    header: list[str] | None = None
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, raw = line[1:].partition(":")
            meta[key.strip()] = json.loads(raw.strip())
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append(line.split(","))
    if header is None:
        raise IOError_(f"{path} has no header row")
    cols = {name: np.array([float(r[j]) for r in rows])
            for j, name in enumerate(header)}
    return meta, cols
