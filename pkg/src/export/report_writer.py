# src/export/report_writer.py
"""
Report and data exporters.

  JSON report   17 significant digits for every float, NaN/inf as null,
                keys in insertion order, written atomically (temp + rename)
  CSV           eigenfields and convergence tables via pandas
  COO           "i j value" text for sparse matrices
"""

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Union

import numpy as np
import pandas as pd
import scipy.sparse as sp

from src.utils.logger import get_logger

log = get_logger("report_writer")

PathLike = Union[str, Path]


# ---------------------- JSON ----------------------
def _float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    text = "%.17g" % x
    if not any(c in text for c in ".eE"):
        text += ".0"
    return text


def to_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{to_json(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "to_dict"):
        return to_json(obj.to_dict(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ---------------------- FILE HELPERS ----------------------
def atomic_write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_report(report: dict, path: PathLike) -> Path:
    out = atomic_write_text(path, to_json(report) + "\n")
    log.info(f"💾 Report written → {out}")
    return out


# ---------------------- CSV ----------------------
def _coordinate_frame(vertices: np.ndarray) -> pd.DataFrame:
    names = ["vx", "vy", "vz"][: vertices.shape[1]]
    return pd.DataFrame(vertices, columns=names)


def eigenfield_frame(vertices: np.ndarray, values: np.ndarray) -> pd.DataFrame:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
        names = ["psi"]
    else:
        names = [f"u{j + 1}" for j in range(values.shape[1])]
    return pd.concat([_coordinate_frame(vertices), pd.DataFrame(values, columns=names)], axis=1)


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    text = frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    out = atomic_write_text(path, text)
    log.info(f"💾 CSV written → {out} ({len(frame)} rows)")
    return out


def write_eigenfield_csv(vertices: np.ndarray, values: np.ndarray, path: PathLike) -> Path:
    return write_csv(eigenfield_frame(vertices, values), path)


# ---------------------- COO ----------------------
def coo_text(matrix) -> str:
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    lines = [f"{int(coo.row[k])} {int(coo.col[k])} {_float(float(coo.data[k]))}" for k in order]
    return "\n".join(lines) + ("\n" if lines else "")


def write_coo(matrix, path: PathLike) -> Path:
    out = atomic_write_text(path, coo_text(matrix))
    log.info(f"💾 COO matrix written → {out}")
    return out
