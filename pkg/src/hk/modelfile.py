"""Model files and report serialization.

Two input formats are accepted, both strict (unknown keys are
rejected).  Chart models are TOML: coordinate names, one polynomial
component vector per frame field, a distribution/complement split, and
a base point.  Algebra models are JSON: basis names, sparse bracket
rows with rational-string coefficients, an optional grading, and the
same split.  All indices in files are 1-based; everything in memory is
0-based.

Outputs (algebra files and reports) are written in a canonical JSON
form: sorted keys, two-space indent, rationals as strings, trailing
newline.  Serializing, parsing, and serializing again is byte
identical, which keeps generated models and golden reports stable
under re-runs.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .config import EngineConfig
from .errors import ParseError
from .exterior import FrameModel
from .liegroups import LieAlgebraSpec
from .poly import Poly, parse_fraction, parse_poly

FORMAT_VERSION = 1

_TOP_KEYS = {"format", "backend", "chart", "algebra", "split", "config"}
_CHART_KEYS = {"coordinates", "frame", "base_point"}
_ALGEBRA_KEYS = {"names", "brackets", "grading"}
_BRACKET_KEYS = {"i", "j", "components"}
_SPLIT_KEYS = {"D", "V"}
_CONFIG_KEYS = {
    "seed",
    "sample_count",
    "sample_box_radius",
    "max_flag_step",
    "stability_margin",
    "depth_bound",
    "pd_restart_budget",
    "oracle_eps",
    "oracle_steps_per_loop",
}


@dataclass
class LoadedModel:
    """A parsed model file, ready for the pipeline."""

    path: str
    backend: str
    model: FrameModel
    spec: LieAlgebraSpec | None
    config: EngineConfig


def _require_keys(table: Mapping, allowed: set[str], where: str) -> None:
    unknown = sorted(set(table.keys()) - allowed)
    if unknown:
        raise ParseError(f"{where}: unknown keys {unknown}")


def _parse_indices(raw: Any, n: int, where: str) -> list[int]:
    if not isinstance(raw, list) or not all(isinstance(v, int) for v in raw):
        raise ParseError(f"{where}: expected a list of integers")
    out = []
    for v in raw:
        if not (1 <= v <= n):
            raise ParseError(f"{where}: index {v} out of range 1..{n}")
        out.append(v - 1)
    if len(set(out)) != len(out):
        raise ParseError(f"{where}: repeated index")
    return sorted(out)


def _parse_split(raw: Any, n: int) -> tuple[list[int], list[int]]:
    if not isinstance(raw, Mapping):
        raise ParseError("split: expected a table with keys D and V")
    _require_keys(raw, _SPLIT_KEYS, "split")
    if "D" not in raw or "V" not in raw:
        raise ParseError("split: both D and V are required")
    d_idx = _parse_indices(raw["D"], n, "split.D")
    v_idx = _parse_indices(raw["V"], n, "split.V")
    if sorted(d_idx + v_idx) != list(range(n)):
        raise ParseError("split: D and V must partition 1..n")
    return d_idx, v_idx


def _parse_config(raw: Any) -> EngineConfig:
    config = EngineConfig()
    if raw is None:
        return config
    if not isinstance(raw, Mapping):
        raise ParseError("config: expected a table")
    _require_keys(raw, _CONFIG_KEYS, "config")
    updates: dict[str, Any] = {}
    for key, value in raw.items():
        if key == "sample_box_radius":
            updates[key] = parse_fraction(str(value))
        elif key == "oracle_eps":
            updates[key] = float(value)
        else:
            if not isinstance(value, int):
                raise ParseError(f"config.{key}: expected an integer")
            updates[key] = value
    return replace(config, **updates)


def _parse_chart(raw: Any, split_raw: Any) -> FrameModel:
    if not isinstance(raw, Mapping):
        raise ParseError("chart: expected a table")
    _require_keys(raw, _CHART_KEYS, "chart")
    for key in _CHART_KEYS:
        if key not in raw:
            raise ParseError(f"chart: missing key {key}")
    coords = raw["coordinates"]
    if (
        not isinstance(coords, list)
        or not coords
        or not all(isinstance(c, str) for c in coords)
    ):
        raise ParseError("chart.coordinates: expected a nonempty list of names")
    if len(set(coords)) != len(coords):
        raise ParseError("chart.coordinates: repeated name")
    n = len(coords)
    fields = raw["frame"]
    if not isinstance(fields, list) or len(fields) != n:
        raise ParseError(f"chart.frame: expected {n} frame fields")
    matrix = [[Poly.zero(coords) for _ in range(n)] for _ in range(n)]
    for j, entry in enumerate(fields):
        if not isinstance(entry, list) or len(entry) != n:
            raise ParseError(
                f"chart.frame[{j + 1}]: expected {n} polynomial components"
            )
        for i, text in enumerate(entry):
            if not isinstance(text, str):
                raise ParseError(
                    f"chart.frame[{j + 1}][{i + 1}]: expected a polynomial string"
                )
            try:
                matrix[i][j] = parse_poly(text, coords)
            except ParseError as exc:
                raise ParseError(f"chart.frame[{j + 1}][{i + 1}]: {exc}") from exc
    base_raw = raw["base_point"]
    if not isinstance(base_raw, list) or len(base_raw) != n:
        raise ParseError(f"chart.base_point: expected {n} rational strings")
    base = [parse_fraction(str(v)) for v in base_raw]
    d_idx, v_idx = _parse_split(split_raw, n)
    return FrameModel.chart(coords, matrix, d_idx, v_idx, base)


def _parse_algebra(raw: Any, split_raw: Any) -> tuple[FrameModel, LieAlgebraSpec]:
    if not isinstance(raw, Mapping):
        raise ParseError("algebra: expected an object")
    _require_keys(raw, _ALGEBRA_KEYS, "algebra")
    names = raw.get("names")
    if (
        not isinstance(names, list)
        or not names
        or not all(isinstance(c, str) for c in names)
    ):
        raise ParseError("algebra.names: expected a nonempty list of names")
    n = len(names)
    rows = raw.get("brackets")
    if not isinstance(rows, list):
        raise ParseError("algebra.brackets: expected a list")
    table: dict[tuple[int, int], dict[int, Fraction]] = {}
    for pos, row in enumerate(rows):
        if not isinstance(row, Mapping):
            raise ParseError(f"algebra.brackets[{pos}]: expected an object")
        _require_keys(row, _BRACKET_KEYS, f"algebra.brackets[{pos}]")
        try:
            i, j = int(row["i"]), int(row["j"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"algebra.brackets[{pos}]: bad i/j") from exc
        if not (1 <= i < j <= n):
            raise ParseError(
                f"algebra.brackets[{pos}]: need 1 <= i < j <= {n}, got ({i},{j})"
            )
        comps = row.get("components")
        if not isinstance(comps, Mapping) or not comps:
            raise ParseError(
                f"algebra.brackets[{pos}]: components must be a nonempty object"
            )
        parsed: dict[int, Fraction] = {}
        for key, value in comps.items():
            k = int(key)
            if not (1 <= k <= n):
                raise ParseError(
                    f"algebra.brackets[{pos}]: component index {k} out of range"
                )
            coeff = parse_fraction(str(value))
            if coeff != 0:
                parsed[k - 1] = coeff
        if (i - 1, j - 1) in table:
            raise ParseError(f"algebra.brackets[{pos}]: duplicate pair ({i},{j})")
        if parsed:
            table[(i - 1, j - 1)] = parsed
    grading_raw = raw.get("grading")
    grading: list[list[int]] | None = None
    if grading_raw is not None:
        if not isinstance(grading_raw, list):
            raise ParseError("algebra.grading: expected a list of index lists")
        grading = [
            _parse_indices(layer, n, f"algebra.grading[{d}]")
            for d, layer in enumerate(grading_raw, start=1)
        ]
    spec = LieAlgebraSpec(n, list(names), table, grading)
    spec.validate()
    d_idx, v_idx = _parse_split(split_raw, n)
    model = FrameModel.abstract_frame(names, table, d_idx, v_idx)
    return model, spec


def load_model(path: str | Path) -> LoadedModel:
    """Parse a chart TOML or algebra JSON model file, strictly."""
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    if path.suffix == ".toml":
        try:
            data = tomllib.loads(text.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ParseError(f"{path}: invalid TOML: {exc}") from exc
    elif path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    else:
        raise ParseError(f"{path}: expected a .toml or .json model file")

    if not isinstance(data, Mapping):
        raise ParseError(f"{path}: top level must be a table/object")
    _require_keys(data, _TOP_KEYS, str(path))
    if data.get("format") != FORMAT_VERSION:
        raise ParseError(f"{path}: format must be {FORMAT_VERSION}")
    backend = data.get("backend")
    if backend == "chart":
        if "algebra" in data:
            raise ParseError(f"{path}: chart backend cannot carry an algebra table")
        if "chart" not in data:
            raise ParseError(f"{path}: chart backend needs a chart table")
        model = _parse_chart(data["chart"], data.get("split"))
        spec = None
    elif backend == "algebra":
        if "chart" in data:
            raise ParseError(f"{path}: algebra backend cannot carry a chart table")
        if "algebra" not in data:
            raise ParseError(f"{path}: algebra backend needs an algebra object")
        model, spec = _parse_algebra(data["algebra"], data.get("split"))
    else:
        raise ParseError(f"{path}: backend must be 'chart' or 'algebra'")
    config = _parse_config(data.get("config"))
    return LoadedModel(str(path), backend, model, spec, config)


# -- canonical serialization -----------------------------------------------------


def frac_str(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def jsonable(obj: Any) -> Any:
    """Recursively convert engine values into canonical JSON values."""
    if isinstance(obj, Fraction):
        return frac_str(obj)
    if isinstance(obj, Poly):
        return str(obj)
    if isinstance(obj, float):
        return obj
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    if isinstance(obj, Mapping):
        return {str(jsonable(k)): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return jsonable(obj.tolist())
    if hasattr(obj, "to_jsonable"):
        return jsonable(obj.to_jsonable())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_canonical_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def write_report(report: Mapping, out: str | Path | None) -> str:
    text = to_canonical_json(report)
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
    return text


def algebra_file_dict(
    spec: LieAlgebraSpec,
    d_indices: Sequence[int],
    v_indices: Sequence[int],
    config: EngineConfig | None = None,
) -> dict:
    """Canonical (1-based, rational-string) file dict for an algebra model."""
    brackets = []
    for (i, j) in sorted(spec.brackets.keys()):
        row = spec.brackets[(i, j)]
        brackets.append(
            {
                "i": i + 1,
                "j": j + 1,
                "components": {str(k + 1): frac_str(c) for k, c in sorted(row.items())},
            }
        )
    algebra: dict[str, Any] = {"names": list(spec.names), "brackets": brackets}
    if spec.grading is not None:
        algebra["grading"] = [
            [i + 1 for i in sorted(layer)] for layer in spec.grading
        ]
    data: dict[str, Any] = {
        "format": FORMAT_VERSION,
        "backend": "algebra",
        "algebra": algebra,
        "split": {
            "D": [i + 1 for i in sorted(d_indices)],
            "V": [i + 1 for i in sorted(v_indices)],
        },
    }
    if config is not None:
        data["config"] = config.to_jsonable()
    return data


def write_algebra_file(
    spec: LieAlgebraSpec,
    d_indices: Sequence[int],
    v_indices: Sequence[int],
    path: str | Path,
) -> None:
    Path(path).write_text(
        to_canonical_json(algebra_file_dict(spec, d_indices, v_indices)),
        encoding="utf-8",
    )
