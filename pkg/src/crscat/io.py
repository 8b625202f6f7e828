"""Plain-text file formats.

Key-value files hold one ``key = value`` pair per line; ``#`` starts a
comment.  CSV files are comma separated with a mandatory header row.  Floats
are written with :func:`repr`, which round-trips exactly.  Every output gets a
JSON sidecar ``<name>.manifest.json`` describing how it was produced.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .potential import MorseVdwParams, params_from_record, params_to_record

__all__ = [
    "InputDataError",
    "RunManifest",
    "manifest_path",
    "write_manifest",
    "read_manifest",
    "format_value",
    "parse_value",
    "write_kv",
    "read_kv",
    "write_csv",
    "read_csv",
    "PotentialFile",
    "load_potential",
    "save_potential",
]


class InputDataError(ValueError):
    """Malformed or missing input file."""


@dataclass
class RunManifest:
    """Reproducibility record accompanying every output file."""

    command: str
    inputs: list[str] = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    seed: int | None = None
    tool_version: str = ""

    def __post_init__(self):
        if not self.tool_version:
            from . import __version__

            self.tool_version = __version__

    def to_dict(self) -> dict:
        return asdict(self)


def manifest_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


def write_manifest(path, manifest) -> Path:
    """Write the sidecar for ``path``; ``manifest`` is a RunManifest or dict."""
    data = manifest.to_dict() if isinstance(manifest, RunManifest) else dict(manifest)
    out = manifest_path(path)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def read_manifest(path) -> dict:
    p = manifest_path(path)
    if not p.exists():
        return {}
    with open(p, encoding="utf-8") as fh:
        return json.load(fh)


# -- key-value text ------------------------------------------------------------


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return ", ".join(format_value(x) for x in v)
    return str(v)


def parse_value(text: str):
    """Best-effort typed parse of a key-value token: int, float, bool, else str."""
    t = text.strip()
    low = t.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", ""):
        return None
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def write_kv(path, mapping: dict, manifest=None, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for k, v in mapping.items():
            fh.write(f"{k} = {format_value(v)}\n")
    if manifest is not None:
        write_manifest(path, manifest)


def read_kv(path) -> dict[str, str]:
    """Raw ``key -> value`` strings in file order."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputDataError(f"{path}:{n}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            if not k:
                raise InputDataError(f"{path}:{n}: empty key")
            if k in out:
                raise InputDataError(f"{path}:{n}: duplicate key {k!r}")
            out[k] = v
    return out


# -- CSV -----------------------------------------------------------------------


def write_csv(path, header, rows, manifest=None) -> None:
    header = list(header)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            row = list(row)
            if len(row) != len(header):
                raise ValueError("row length does not match header")
            w.writerow([format_value(x) for x in row])
    if manifest is not None:
        write_manifest(path, manifest)


def read_csv(path, required=None) -> tuple[dict[str, np.ndarray], dict]:
    """Columns as float arrays plus the sidecar manifest (empty if absent)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputDataError(f"{path}: empty file") from None
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    missing = [c for c in (required or ()) if c not in header]
    if missing:
        raise InputDataError(f"{path}: missing columns {', '.join(missing)}")
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float).reshape(len(rows), len(header))
    except ValueError as exc:
        raise InputDataError(f"{path}: {exc}") from None
    cols = {h: data[:, i].copy() for i, h in enumerate(header)}
    return cols, read_manifest(path)


# -- potential files -------------------------------------------------------------


@dataclass
class PotentialFile:
    """A potential definition together with the exact text it was read from.

    Keeping the original tokens makes ``save(load(f))`` reproduce ``f``
    byte for byte when it is in canonical ``key = value`` form.
    """

    tokens: dict[str, str]

    @classmethod
    def from_params(cls, p: MorseVdwParams) -> PotentialFile:
        return cls({k: format_value(v) for k, v in params_to_record(p).items()})

    @property
    def record(self) -> dict[str, float]:
        return {k: float(v) for k, v in self.tokens.items()}

    @property
    def params(self) -> MorseVdwParams:
        try:
            return params_from_record(self.record)
        except KeyError as exc:
            raise InputDataError(str(exc)) from None


_POTENTIAL_KEYS = ("depth_K", "r_min_a0", "width_inv_a0", "c6_au", "r_join_a0")


def load_potential(path) -> PotentialFile:
    tokens = read_kv(path)
    unknown = [k for k in tokens if k not in _POTENTIAL_KEYS]
    if unknown:
        raise InputDataError(f"{path}: unknown keys {', '.join(unknown)}")
    for k, v in tokens.items():
        try:
            float(v)
        except ValueError:
            raise InputDataError(f"{path}: {k} is not a number: {v!r}") from None
    pf = PotentialFile(tokens)
    pf.params  # validates
    return pf


def save_potential(path, pot, manifest=None) -> None:
    """Write a :class:`PotentialFile` or :class:`MorseVdwParams`."""
    pf = pot if isinstance(pot, PotentialFile) else PotentialFile.from_params(pot)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k in _POTENTIAL_KEYS:
            if k in pf.tokens:
                fh.write(f"{k} = {pf.tokens[k]}\n")
    if manifest is not None:
        write_manifest(path, manifest)


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
