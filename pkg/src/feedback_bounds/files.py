"""State / Hamiltonian JSON files and CSV tables.

State file::

    {"dims": [2, 2, 2, 2],
     "roles": {"S": [0], "A": [1], "E": [2, 3]},
     "amplitudes": [[re, im], ...]}          # basis index order, subsystem 0 most significant

Hamiltonian file::

    {"dims": [2], "entries": [[re, im], ...]}   # row-major
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .numerics import DomainError
from .protocol import Hamiltonian
from .tensor import HilbertLayout, PartitionedPureState

STATE_NORM_TOL = 1e-8


class InputError(DomainError):
    """A user-supplied file is malformed; the message names the location."""


def _load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc


def _complex_list(raw: Any, where: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise InputError(f"{where}: expected a list of [re, im] pairs")
    out = np.empty(len(raw), dtype=complex)
    for k, pair in enumerate(raw):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
        ):
            raise InputError(f"{where}[{k}]: expected [re, im] pair of numbers, got {pair!r}")
        out[k] = complex(pair[0], pair[1])
    return out


def _dims(raw: Any, where: str) -> tuple[int, ...]:
    if not isinstance(raw, list) or not raw or not all(isinstance(d, int) and not isinstance(d, bool) for d in raw):
        raise InputError(f"{where}: expected a nonempty list of integers")
    return tuple(raw)


def _field(doc: Any, key: str, path) -> Any:
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    if key not in doc:
        raise InputError(f"{path}: missing field {key!r}")
    return doc[key]


def parse_state(doc: Any, path: str = "<state>", renormalize: bool = False) -> PartitionedPureState:
    dims = _dims(_field(doc, "dims", path), f"{path}: dims")
    roles = _field(doc, "roles", path)
    if not isinstance(roles, dict):
        raise InputError(f"{path}: roles must map 'S'/'A'/'E' to index lists")
    for r, idx in roles.items():
        if not isinstance(idx, list) or not all(isinstance(i, int) for i in idx):
            raise InputError(f"{path}: roles.{r} must be a list of integers")
    amps = _complex_list(_field(doc, "amplitudes", path), f"{path}: amplitudes")
    try:
        layout = HilbertLayout.from_role_map(dims, roles, allow_empty_environment=bool(doc.get("allow_empty_environment", False)))
    except DomainError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if amps.size != layout.total_dim:
        raise InputError(f"{path}: amplitudes has {amps.size} entries, dims multiply to {layout.total_dim}")
    norm = float(np.linalg.norm(amps))
    if norm == 0.0:
        raise InputError(f"{path}: amplitudes are all zero")
    if abs(norm - 1.0) > STATE_NORM_TOL and not renormalize:
        raise InputError(f"{path}: amplitudes have norm {norm!r} (pass --renormalize to rescale)")
    # leave already-normalized input untouched so replays are bit-exact
    return PartitionedPureState(layout, amps if abs(norm - 1.0) <= 1e-12 else amps / norm)


def load_state_file(path: str | Path, renormalize: bool = False) -> PartitionedPureState:
    return parse_state(_load_json(path), str(path), renormalize)


def parse_hamiltonian(doc: Any, path: str = "<hamiltonian>") -> Hamiltonian:
    dims = _dims(_field(doc, "dims", path), f"{path}: dims")
    n = math.prod(dims)
    entries = _complex_list(_field(doc, "entries", path), f"{path}: entries")
    if entries.size != n * n:
        raise InputError(f"{path}: entries has {entries.size} values, expected {n * n} for dims {list(dims)}")
    try:
        return Hamiltonian(entries.reshape(n, n))
    except DomainError as exc:
        raise InputError(f"{path}: {exc}") from exc


def load_hamiltonian_file(path: str | Path) -> Hamiltonian:
    return parse_hamiltonian(_load_json(path), str(path))


def complex_pairs(values: Iterable[complex]) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).reshape(-1)]


def state_to_dict(state: PartitionedPureState) -> dict:
    return {
        "dims": list(state.layout.dims),
        "roles": state.layout.role_map(),
        "amplitudes": complex_pairs(state.amplitudes),
    }


def hamiltonian_to_dict(h: Hamiltonian) -> dict:
    return {"dims": [h.dim], "entries": complex_pairs(h.matrix)}


# -- CSV ------------------------------------------------------------------------


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dumps_csv(rows: Sequence[dict], columns: Sequence[str], manifest: dict | None = None) -> str:
    buf = io.StringIO()
    if manifest is not None:
        buf.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def _parse_cell(s: str) -> Any:
    if s in ("true", "false"):
        return s == "true"
    try:
        return float(s)
    except ValueError:
        return s


def loads_csv(text: str) -> tuple[dict | None, list[dict]]:
    lines = text.splitlines()
    manifest = None
    if lines and lines[0].startswith("# manifest: "):
        manifest = json.loads(lines[0][len("# manifest: "):])
        lines = lines[1:]
    reader = csv.DictReader(lines)
    return manifest, [{k: _parse_cell(v) for k, v in row.items()} for row in reader]
