"""State and report serialization.

State JSON::

    {"labels": ["A", "B"], "dims": [2, 2], "kind": "pure",
     "amplitudes": [[re, im], ...]}

or, for ``"kind": "mixed"``, a row-major ``"matrix"`` of ``[re, im]``
pairs. Optional ``"name"`` and ``"note"`` strings are carried along;
every other key is rejected. Schema problems raise ``StateFormatError``
with the JSON path and the line and column of the offending value;
physically invalid states (norm, hermiticity, positivity) raise
``StateInvariantError`` from the state constructors.
"""
from __future__ import annotations

import json
import math
import platform
import re
import time
from dataclasses import asdict, dataclass, field
from json.decoder import scanstring
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvalidArgumentError, StateFormatError
from .states import DensityOperator, PureState, State, SystemShape

STATE_SCHEMA = "gmekit.state/1"
_ALLOWED = {"labels", "dims", "kind", "amplitudes", "matrix", "name", "note", "schema"}

# --------------------------------------------------------------------------- #
# source positions, computed only when an error needs reporting

_WS = re.compile(r"[ \t\n\r]*")
_SCALAR = re.compile(r"-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][-+]?\d+)?|true|false|null")


def _positions(text: str) -> dict[tuple, int]:
    """Offsets of every value in a JSON document, keyed by access path."""
    out: dict[tuple, int] = {}

    def value(pos: int, path: tuple) -> int:
        pos = _WS.match(text, pos).end()
        out[path] = pos
        ch = text[pos:pos + 1]
        if ch == "{":
            pos = _WS.match(text, pos + 1).end()
            if text[pos:pos + 1] == "}":
                return pos + 1
            while True:
                pos = _WS.match(text, pos).end()
                key, pos = scanstring(text, pos + 1)
                pos = _WS.match(text, pos).end() + 1  # past ':'
                pos = _WS.match(text, value(pos, path + (key,))).end()
                if text[pos] == "}":
                    return pos + 1
                pos += 1
        if ch == "[":
            pos = _WS.match(text, pos + 1).end()
            if text[pos:pos + 1] == "]":
                return pos + 1
            n = 0
            while True:
                pos = _WS.match(text, value(pos, path + (n,))).end()
                n += 1
                if text[pos] == "]":
                    return pos + 1
                pos += 1
        if ch == '"':
            return scanstring(text, pos + 1)[1]
        return _SCALAR.match(text, pos).end()

    value(0, ())
    return out


def _path_text(path: tuple) -> str:
    return "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in path)


class _Context:
    def __init__(self, text: str | None, source: str | None):
        self.text, self.source = text, source
        self._pos = None

    def fail(self, path: tuple, message: str) -> StateFormatError:
        line = col = None
        if self.text is not None:
            if self._pos is None:
                self._pos = _positions(self.text)
            probe = path
            while probe not in self._pos and probe:
                probe = probe[:-1]
            offset = self._pos.get(probe)
            if offset is not None:
                line = self.text.count("\n", 0, offset) + 1
                col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return StateFormatError(message, _path_text(path), line, col, self.source)


# --------------------------------------------------------------------------- #
# states

def _complex(entry: Any, path: tuple, ctx: _Context) -> complex:
    if (
        not isinstance(entry, list)
        or len(entry) != 2
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in entry)
    ):
        raise ctx.fail(path, "expected a [re, im] pair of numbers")
    if not all(math.isfinite(x) for x in entry):
        raise ctx.fail(path, "amplitude entries must be finite")
    return complex(entry[0], entry[1])


def state_from_dict(data: Any, text: str | None = None, source: str | None = None) -> State:
    """Validate a decoded state document and build the state."""
    ctx = _Context(text, source)
    if not isinstance(data, dict):
        raise ctx.fail((), "a state must be a JSON object")
    unknown = sorted(set(data) - _ALLOWED)
    if unknown:
        raise ctx.fail((unknown[0],), f"unknown key {unknown[0]!r}")
    for key in ("dims", "kind"):
        if key not in data:
            raise ctx.fail((), f"missing required key {key!r}")
    dims = data["dims"]
    if not isinstance(dims, list) or not dims:
        raise ctx.fail(("dims",), "dims must be a nonempty list")
    for n, d in enumerate(dims):
        if isinstance(d, bool) or not isinstance(d, int) or d < 2:
            raise ctx.fail(("dims", n), "local dimensions must be integers >= 2")
    labels = data.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != len(dims):
            raise ctx.fail(("labels",), f"expected {len(dims)} labels")
        for n, s in enumerate(labels):
            if not isinstance(s, str):
                raise ctx.fail(("labels", n), "labels must be strings")
    for key in ("name", "note"):
        if key in data and not isinstance(data[key], str):
            raise ctx.fail((key,), f"{key} must be a string")
    try:
        shape = SystemShape(dims, labels)
    except InvalidArgumentError as exc:
        raise ctx.fail(("dims",), str(exc)) from None
    kind = data["kind"]
    if kind == "pure":
        if "matrix" in data:
            raise ctx.fail(("matrix",), "a pure state carries amplitudes, not a matrix")
        amps = data.get("amplitudes")
        if not isinstance(amps, list):
            raise ctx.fail(("amplitudes",) if "amplitudes" in data else (), "amplitudes list required")
        if len(amps) != shape.dim:
            raise ctx.fail(("amplitudes",), f"{len(amps)} amplitudes for dimension {shape.dim}")
        vec = np.array([_complex(e, ("amplitudes", n), ctx) for n, e in enumerate(amps)])
        return PureState(shape, vec)
    if kind == "mixed":
        if "amplitudes" in data:
            raise ctx.fail(("amplitudes",), "a mixed state carries a matrix, not amplitudes")
        rows = data.get("matrix")
        if not isinstance(rows, list):
            raise ctx.fail(("matrix",) if "matrix" in data else (), "matrix required")
        if len(rows) != shape.dim:
            raise ctx.fail(("matrix",), f"{len(rows)} rows for dimension {shape.dim}")
        mat = np.empty((shape.dim, shape.dim), dtype=complex)
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != shape.dim:
                raise ctx.fail(("matrix", i), f"row must hold {shape.dim} entries")
            for j, e in enumerate(row):
                mat[i, j] = _complex(e, ("matrix", i, j), ctx)
        return DensityOperator(shape, mat)
    raise ctx.fail(("kind",), "kind must be 'pure' or 'mixed'")


def loads_state(text: str, source: str | None = None) -> State:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFormatError(exc.msg, "$", exc.lineno, exc.colno, source) from None
    return state_from_dict(data, text, source)


def load_state(path: str | Path) -> State:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StateFormatError(f"cannot read file: {exc.strerror}", source=str(path)) from None
    return loads_state(text, str(path))


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def state_to_dict(state: State, name: str | None = None) -> dict:
    d: dict[str, Any] = {
        "schema": STATE_SCHEMA,
        "labels": list(state.shape.labels),
        "dims": list(state.shape.dims),
    }
    if name is not None:
        d["name"] = name
    if isinstance(state, PureState):
        d["kind"] = "pure"
        d["amplitudes"] = [_pair(z) for z in state.amplitudes]
    else:
        d["kind"] = "mixed"
        d["matrix"] = [[_pair(z) for z in row] for row in state.matrix]
    return d


def dumps_state(state: State, name: str | None = None) -> str:
    """One amplitude (or matrix row) per line, so error positions stay readable."""
    d = state_to_dict(state, name)
    body = "amplitudes" if "amplitudes" in d else "matrix"
    items = d.pop(body)
    head = json.dumps(d)[:-1]
    lines = ",\n  ".join(json.dumps(x) for x in items)
    return f'{head}, "{body}": [\n  {lines}\n]}}\n'


def save_state(state: State, path: str | Path, name: str | None = None) -> None:
    Path(path).write_text(dumps_state(state, name))


# --------------------------------------------------------------------------- #
# run manifests

def tool_version() -> str:
    from . import __version__

    return __version__


@dataclass
class RunManifest:
    """Everything needed to replay a command; ``wall_time`` is informational."""

    command: str
    inputs: list[str] = field(default_factory=list)
    spec: dict | None = None
    roof_config: dict | None = None
    seed: int | None = None
    options: dict = field(default_factory=dict)
    version: str = field(default_factory=tool_version)
    numpy: str = np.__version__
    python: str = platform.python_version()
    wall_time: float | None = None
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def finish(self) -> "RunManifest":
        self.wall_time = round(time.perf_counter() - self._t0, 6)
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("_t0")
        return d

    def replay_key(self) -> dict:
        """The manifest without timing, for comparing two runs."""
        d = self.to_dict()
        d.pop("wall_time")
        return d
