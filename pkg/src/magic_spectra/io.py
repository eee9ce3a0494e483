"""File formats: MPS JSON, results CSV with a metadata header, flat config files."""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .imps import ImpsState

FORMAT_VERSION = 1
TOOL_VERSION = "0.1.0"


def mps_to_dict(tensors, unit_cell: int | None = None) -> dict:
    if isinstance(tensors, ImpsState):
        tensors = [tensors.tensor]
    tensors = [np.asarray(t, dtype=complex) for t in tensors]
    if not tensors:
        raise ValidationError("no tensors to write")
    d = tensors[0].shape[0]
    return {
        "format_version": FORMAT_VERSION,
        "d": int(d),
        "unit_cell": int(unit_cell if unit_cell is not None else len(tensors)),
        "tensors": [
            {"shape": list(t.shape), "re": t.real.ravel().tolist(), "im": t.imag.ravel().tolist()} for t in tensors
        ],
    }


def write_mps(path, tensors, unit_cell: int | None = None) -> None:
    Path(path).write_text(json.dumps(mps_to_dict(tensors, unit_cell), indent=1))


def mps_from_dict(doc: dict) -> list[np.ndarray]:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported or missing format_version: {doc.get('format_version')!r}")
    out = []
    for t in doc.get("tensors", []):
        shape = tuple(int(x) for x in t["shape"])
        if len(shape) != 3 or shape[0] != doc["d"]:
            raise ValidationError(f"bad tensor shape {shape}")
        n = int(np.prod(shape))
        if len(t["re"]) != n or len(t["im"]) != n:
            raise ValidationError("re/im length does not match shape")
        out.append((np.array(t["re"], dtype=float) + 1j * np.array(t["im"], dtype=float)).reshape(shape))
    if not out:
        raise ValidationError("file holds no tensors")
    return out


def read_mps_tensors(path) -> list[np.ndarray]:
    return mps_from_dict(json.loads(Path(path).read_text()))


def read_mps(path) -> ImpsState:
    tensors = read_mps_tensors(path)
    if len(tensors) == 1:
        return ImpsState.from_tensor(tensors[0])
    return ImpsState.from_unit_cell(tensors)


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(stream, columns, rows, meta: dict | None = None) -> None:
    """Header comment lines (``# key=value``), then a CSV table.

    Floats use the shortest round-trip representation, so equal inputs give
    byte-identical files.
    """
    for k, v in (meta or {}).items():
        stream.write(f"# {k}={v}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        vals = [row[c] for c in columns] if isinstance(row, dict) else list(row)
        w.writerow([format_value(x) for x in vals])


def read_csv(stream):
    """Inverse of write_csv: (meta, columns, rows as lists of strings)."""
    if isinstance(stream, (str, Path)):
        stream = _io.StringIO(Path(stream).read_text())
    meta, lines = {}, []
    for line in stream:
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k.strip()] = v
        else:
            lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader)
    return meta, columns, [r for r in reader]


@dataclass
class RunConfig:
    command: str = "sre-density"
    source: str = "chi2"
    file: str = ""
    grid: str = "-2:2:0.01"
    n: int = 2
    chi_t: int = 0
    cutoff: float = 0.0
    k: int = 0
    N: int = 20
    r: int = 20
    L: str = "6,8,10"
    gc: str = "0.0"
    family: str = "full"
    gate: str = "T"
    abscissa: str = "xi_sre"
    tol: float = 1e-12
    seed: int = 0
    workers: int = 0
    out: str = ""

    def values(self) -> np.ndarray:
        return parse_grid(self.grid)

    def hash(self) -> str:
        items = sorted((k, format_value(v)) for k, v in asdict(self).items() if k not in ("out", "workers"))
        return hashlib.sha256(repr(items).encode()).hexdigest()[:16]


def parse_grid(text: str) -> np.ndarray:
    """``a:b:step`` (inclusive of b up to rounding) or a comma list."""
    text = str(text).strip()
    if ":" in text:
        a, b, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValidationError("grid step must be positive")
        count = int(np.floor((b - a) / step + 1e-9)) + 1
        return np.round(a + step * np.arange(count), 12)
    try:
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise ValidationError(f"cannot parse grid {text!r}") from exc


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse integer list {text!r}") from exc


def _coerce(name: str, value: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ValidationError(f"unknown config key {name!r}")
    t = types[name]
    try:
        if t in ("int", int):
            return int(value)
        if t in ("float", float):
            return float(value)
    except ValueError as exc:
        raise ValidationError(f"bad value for {name}: {value!r}") from exc
    return str(value)


def parse_config(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.replace("-", "_")
        out[k] = _coerce(k, v)
    return out


def load_config(path=None, **overrides) -> RunConfig:
    """Defaults, then the file, then non-None overrides (flags win)."""
    values = {}
    if path:
        values.update(parse_config(Path(path).read_text()))
    for k, v in overrides.items():
        if v is not None:
            values[k] = _coerce(k, str(v)) if not isinstance(v, (int, float)) else v
    return RunConfig(**values)
