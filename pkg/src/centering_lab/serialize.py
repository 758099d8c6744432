"""JSON input loading against the shipped schemas, and canonical output.

Output numbers carry 12 significant digits; infinities are written as the
string "inf" and complex numbers as ``[re, im]`` pairs.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, List, Union

import jsonschema
import numpy as np

from .errors import SchemaError
from .interval import GridFunction
from .mixture import DiscreteDistribution
from .prob_core import FiniteProbSpace, Partition, RandVar

__all__ = [
    "SCHEMA_NAMES",
    "load_schema",
    "validate",
    "read_json",
    "load_space",
    "load_randvar",
    "load_partition",
    "load_matrix",
    "load_distribution",
    "load_functions",
    "canonical",
    "dumps",
]

SCHEMA_NAMES = ("space", "randvar", "partition", "matrix", "distribution",
                "gridfunction", "functions", "output")
DIGITS = 12

PathLike = Union[str, Path]


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    if name not in SCHEMA_NAMES:
        raise SchemaError(f"unknown schema {name!r}")
    text = resources.files(__package__).joinpath("schemas", f"{name}.json").read_text()
    return json.loads(text)


def validate(doc: Any, name: str) -> None:
    try:
        jsonschema.validate(doc, load_schema(name))
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"{name}: {exc.message}") from exc


def read_json(path: PathLike, name: str) -> dict:
    """Parse and schema-check a JSON file; I/O and syntax errors become SchemaError."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    validate(doc, name)
    return doc


def _scalar(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def load_space(path: PathLike) -> FiniteProbSpace:
    return FiniteProbSpace(read_json(path, "space")["weights"])


def load_randvar(path: PathLike) -> RandVar:
    return RandVar([_scalar(v) for v in read_json(path, "randvar")["values"]])


def load_partition(path: PathLike) -> Partition:
    return Partition(read_json(path, "partition")["blocks"])


def load_matrix(path: PathLike) -> np.ndarray:
    rows = read_json(path, "matrix")["rows"]
    if len({len(r) for r in rows}) != 1:
        raise SchemaError("matrix: rows have unequal lengths")
    m = np.array([[_scalar(v) for v in r] for r in rows], dtype=complex)
    return m.real.copy() if np.all(m.imag == 0) else m


def load_distribution(path: PathLike) -> DiscreteDistribution:
    return DiscreteDistribution(tuple((v, m) for v, m in read_json(path, "distribution")["atoms"]))


def _grid(doc: dict) -> GridFunction:
    return GridFunction(doc["cells"], doc["values"], doc.get("edges"))


def load_functions(path: PathLike) -> List[GridFunction]:
    """A batch file ``{"functions": [...]}`` or a single grid function."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if isinstance(doc, dict) and "functions" in doc:
        validate(doc, "functions")
        return [_grid(d) for d in doc["functions"]]
    validate(doc, "gridfunction")
    return [_grid(doc)]


def _num(x: float) -> Union[float, int, str]:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    r = float(f"{x:.{DIGITS}g}")
    return r + 0.0


def canonical(obj: Any) -> Any:
    """Recursively convert to JSON-ready builtins with rounded numbers."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [canonical(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        return _num(z.real) if z.imag == 0 else [_num(z.real), _num(z.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    return json.dumps(canonical(obj), indent=2, sort_keys=False) + "\n"
