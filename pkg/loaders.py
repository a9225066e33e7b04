import json
import logging
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ValidationError
from sympy import Rational

import schemas
from coxeter import Poset
from errors import ParseError, ToolkitError
from permutahedron import mask_of
from simplicial import AbstractComplex, SimplicialMap, permutation_sign
from small_cover import bits_to_mask

logger = logging.getLogger(__name__)

Model = TypeVar("Model", bound=BaseModel)


class LoadedComplex(NamedTuple):
    complex: AbstractComplex
    coloring: Optional[List[int]]
    # Signes ramenés à l'ordre trié des sommets, indexés comme complex.top_simplices
    orientation: Optional[List[int]]


class LoadedPlacement(NamedTuple):
    complex: LoadedComplex
    vectors: np.ndarray
    exact: Optional[List[List[Rational]]]


class LoadedMap(NamedTuple):
    map: SimplicialMap
    source: LoadedComplex
    target: LoadedComplex


# Lecture brute
def read_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})")
    if not isinstance(data, dict):
        raise ParseError(f"{path} must hold a JSON object")
    return data


def file_kind(path: str) -> str:
    return read_json(path).get("kind", "complex")


def parse_model(model: Type[Model], data: Dict[str, Any], path: str = "<input>") -> Model:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        messages = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
        raise ParseError(f"{path} does not match the {model.__name__} format", witness=messages)


# Complexes
def complex_from_schema(data: schemas.ComplexFile) -> LoadedComplex:
    try:
        complex_ = AbstractComplex.from_simplices(data.top_simplices, vertex_count=data.vertex_count)
    except ToolkitError as e:
        raise ParseError(e.detail, witness=e.witness)
    orientation = None
    if data.orientation is not None:
        signs = [0] * len(complex_.top_simplices)
        for simplex, sign in zip(data.top_simplices, data.orientation):
            signs[complex_.index[tuple(sorted(simplex))]] = sign * permutation_sign(simplex)
        orientation = signs
    return LoadedComplex(complex=complex_, coloring=data.coloring, orientation=orientation)


def load_complex(path: str) -> LoadedComplex:
    loaded = complex_from_schema(parse_model(schemas.ComplexFile, read_json(path), path))
    logger.debug(f"{path}: complex of dimension {loaded.complex.dim} with {loaded.complex.vertex_count} vertices")
    return loaded


# Posets
def load_poset(path: str) -> Poset:
    data = parse_model(schemas.PosetFile, read_json(path), path)
    return Poset.from_relations(range(data.elements), [tuple(pair) for pair in data.less])


# Placements
def _rational(value) -> Rational:
    try:
        return Rational(str(value))
    except (TypeError, ValueError):
        raise ParseError(f"{value!r} is not a rational number")


def load_placement(path: str) -> LoadedPlacement:
    data = parse_model(schemas.PlacementFile, read_json(path), path)
    loaded = complex_from_schema(data.complex)
    exact = None
    if data.exact:
        exact = [[_rational(x) for x in row] for row in data.vectors]
        vectors = np.array([[float(x) for x in row] for row in exact])
    else:
        try:
            vectors = np.array([[float(x) for x in row] for row in data.vectors])
        except ValueError:
            raise ParseError(f"{path}: float placements take numbers only")
    return LoadedPlacement(complex=loaded, vectors=vectors, exact=exact)


# Applications simpliciales
def load_map(path: str) -> LoadedMap:
    data = parse_model(schemas.MapFile, read_json(path), path)
    source = complex_from_schema(data.source)
    target = complex_from_schema(data.target)
    try:
        f = SimplicialMap(source=source.complex, target=target.complex, vertex_map=tuple(data.vertex_map))
    except ToolkitError as e:
        raise ParseError(e.detail, witness=e.witness)
    return LoadedMap(map=f, source=source, target=target)


# Fonctions caractéristiques
def load_characteristic(path: str) -> Tuple[int, List[int]]:
    data = parse_model(schemas.CharacteristicFile, read_json(path), path)
    return data.rank, [bits_to_mask(v) for v in data.values]


# Appariements
def load_pairings(path: str) -> Dict[int, List[int]]:
    data = parse_model(schemas.PairingsFile, read_json(path), path)
    images: Dict[int, List[int]] = {}
    for entry in data.pairings:
        if not entry.omega or min(entry.omega) < 1:
            raise ParseError(f"pairing colors {entry.omega} must be positive")
        images[mask_of(entry.omega)] = entry.image
    return images


# Rapports
def dump_report(report: schemas.Report, output: schemas.OutputFormat = schemas.OutputFormat.JSON) -> str:
    if output == schemas.OutputFormat.JSON:
        return report.model_dump_json(indent=2)
    lines = [f"{report.command}: {report.status.value}"]
    for key, value in report.payload.items():
        lines.append(f"  {key}: {json.dumps(value, default=str)}")
    lines.append(f"  ({report.timing:.3f}s, cycleforge {report.version})")
    return "\n".join(lines)


def write_json(path: str, data: Dict[str, Any]) -> None:
    Path(path).write_text(json.dumps(data, indent=2), encoding="utf-8")
