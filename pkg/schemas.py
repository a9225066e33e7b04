from pydantic import BaseModel, Field, computed_field, field_validator, model_validator
from typing import Optional, List, Dict, Any, Literal, Union
from enum import Enum

import settings

# Enums
class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    PARTIAL = "partial"

class Arithmetic(str, Enum):
    EXACT = "exact"
    FLOAT = "float"

class OutputFormat(str, Enum):
    JSON = "json"
    TEXT = "text"

# === Fichiers d'entrée ===

class ComplexFile(BaseModel):
    kind: Literal["complex"] = "complex"
    dim: int = Field(ge=0)
    vertex_count: int = Field(ge=0)
    top_simplices: List[List[int]]
    coloring: Optional[List[int]] = None
    orientation: Optional[List[int]] = None

    @model_validator(mode="after")
    def check_shapes(self):
        for simplex in self.top_simplices:
            if len(simplex) != self.dim + 1:
                raise ValueError(f"simplex {simplex} does not have {self.dim + 1} vertices")
        if self.coloring is not None and len(self.coloring) != self.vertex_count:
            raise ValueError("coloring must list one color per vertex")
        if self.orientation is not None:
            if len(self.orientation) != len(self.top_simplices):
                raise ValueError("orientation must list one sign per top simplex")
            if any(s not in (1, -1) for s in self.orientation):
                raise ValueError("orientation signs must be +1 or -1")
        return self

class PosetFile(BaseModel):
    kind: Literal["poset"] = "poset"
    elements: int = Field(ge=0)
    less: List[List[int]] = []

    @field_validator("less")
    @classmethod
    def check_pairs(cls, value):
        for pair in value:
            if len(pair) != 2:
                raise ValueError(f"relation {pair} is not a pair")
        return value

    @model_validator(mode="after")
    def check_range(self):
        for i, j in self.less:
            if not (0 <= i < self.elements and 0 <= j < self.elements):
                raise ValueError(f"relation ({i}, {j}) leaves [0, {self.elements})")
        return self

class PlacementFile(BaseModel):
    kind: Literal["placement"] = "placement"
    complex: ComplexFile
    # Coordonnées : nombres, ou chaînes "p/q" en mode exact
    vectors: List[List[Union[int, float, str]]]
    exact: bool = False

    @model_validator(mode="after")
    def check_vectors(self):
        if len(self.vectors) != self.complex.vertex_count:
            raise ValueError("placement must give one vector per vertex")
        if len({len(v) for v in self.vectors}) > 1:
            raise ValueError("placement vectors have different lengths")
        return self

class MapFile(BaseModel):
    kind: Literal["map"] = "map"
    source: ComplexFile
    target: ComplexFile
    vertex_map: List[int]

    @model_validator(mode="after")
    def check_map(self):
        if len(self.vertex_map) != self.source.vertex_count:
            raise ValueError("vertex_map must cover every source vertex")
        return self

class CharacteristicFile(BaseModel):
    kind: Literal["characteristic"] = "characteristic"
    rank: int = Field(ge=1)
    values: List[List[int]]

    @model_validator(mode="after")
    def check_values(self):
        for value in self.values:
            if len(value) != self.rank or any(b not in (0, 1) for b in value):
                raise ValueError(f"{value} is not a bitvector of length {self.rank}")
        return self

class PairingEntry(BaseModel):
    omega: List[int]
    image: List[int]

class PairingsFile(BaseModel):
    kind: Literal["pairings"] = "pairings"
    pairings: List[PairingEntry]

# === Configuration de la ligne de commande ===

class Config(BaseModel):
    command: str
    input: Optional[str] = None
    pairings: Optional[str] = None
    lambda_file: Optional[str] = None
    map_file: Optional[str] = None
    budget: int = Field(default=settings.DEFAULT_BUDGET, ge=1)
    seed: int = Field(default=settings.DEFAULT_SEED, ge=0, lt=2 ** 64)
    arithmetic: Arithmetic = Arithmetic.EXACT
    tolerance: float = settings.DEFAULT_TOLERANCE
    output: OutputFormat = OutputFormat.JSON
    auto_subdivide: bool = False
    flag_square: bool = False
    real_moment_angle: bool = False
    n: Optional[int] = Field(default=None, ge=1)
    eps: Optional[float] = Field(default=None, gt=0)
    trials: int = Field(default=200, ge=1)
    max_len: int = Field(default=12, ge=1)

    @field_validator("tolerance")
    @classmethod
    def check_tolerance(cls, value):
        if not 0 < value <= 1e-3:
            raise ValueError("tolerance must lie in (0, 1e-3]")
        return value

# === Rapports et certificats ===

class Report(BaseModel):
    command: str
    status: Status
    payload: Dict[str, Any] = {}
    timing: float = 0.0
    version: str = settings.VERSION

class Counterexample(BaseModel):
    check: str
    detail: str
    words: List[List[Any]] = []

class AlgebraReport(BaseModel):
    trials: int
    checks: Dict[str, int] = {}
    counterexamples: List[Counterexample] = []

    @computed_field
    @property
    def ok(self) -> bool:
        return not self.counterexamples

class CheckResult(BaseModel):
    passed: bool
    witness: Optional[Any] = None

class RealizationCertificate(BaseModel):
    cells: int
    simplices: int
    complete: bool
    k: Optional[int] = None
    fiber_counts: List[int] = []
    projection_fiber: Optional[int] = None
    checks: Dict[str, CheckResult] = {}

    @computed_field
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

class SparseReport(BaseModel):
    n: int
    pairs_checked: int
    samples_checked: int
    cos_bound: str
    diameter_ok: bool
    violations: List[Dict[str, Any]] = []

    @computed_field
    @property
    def ok(self) -> bool:
        return self.diameter_ok and not self.violations
