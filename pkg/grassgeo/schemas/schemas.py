"""
Pydantic schemas for JSON input/output validation.
"""
import json
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from grassgeo.core.config import settings
from grassgeo.models.models import (
    ConditionRecord,
    Field as ScalarField,
    GramPolyhedron,
    GrassmannPoint,
    HermitianSpace,
    Instance,
)


# A real scalar is a number, a complex scalar is [re, im].
Scalar = Union[float, Tuple[float, float]]
MatrixRows = List[List[Scalar]]


# ============== Matrix codec ==============

def encode_matrix(array: NDArray) -> List[List[Any]]:
    """
    Encode a 2-D array as nested lists.

    Complex arrays are written entrywise as ``[re, im]`` pairs, real arrays as
    plain numbers.
    """
    array = np.asarray(array)
    if array.ndim == 1:
        array = array.reshape(-1, 1)
    if np.iscomplexobj(array):
        return [[[float(z.real), float(z.imag)] for z in row] for row in array]
    return [[float(x) for x in row] for row in array]


def decode_matrix(rows: Sequence[Sequence[Any]]) -> NDArray:
    """
    Decode nested lists produced by ``encode_matrix``.

    Raises:
        ValueError: If the rows are empty or ragged
    """
    if not rows or not rows[0]:
        raise ValueError("matrix must have at least one row and one column")
    width = len(rows[0])
    for index, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"row {index + 1} has {len(row)} entries, expected {width}")

    is_complex = any(isinstance(x, (list, tuple)) for row in rows for x in row)
    if not is_complex:
        return np.array(rows, dtype=np.float64)

    out = np.zeros((len(rows), width), dtype=np.complex128)
    for a, row in enumerate(rows):
        for b, x in enumerate(row):
            out[a, b] = complex(x[0], x[1]) if isinstance(x, (list, tuple)) else complex(x)
    return out


def dump_json(model: BaseModel) -> str:
    """Serialize a report with sorted keys so identical runs give identical bytes."""
    return json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def override_tolerance(overrides: Dict[str, float], check: str, default: float) -> float:
    """Per-check override, then the global ``*`` override, then the default."""
    if check in overrides:
        return overrides[check]
    return overrides.get("*", default)


# ============== Base Schemas ==============

class BaseSchema(BaseModel):
    """Base schema with common configuration."""
    model_config = ConfigDict(from_attributes=True, populate_by_name=True)


# ============== Input Schemas ==============

class SpaceSchema(BaseSchema):
    """Ambient space: field tag, dimension and hermitian form matrix."""
    field: Literal["R", "C"]
    n: int = Field(..., ge=1)
    J: MatrixRows

    @model_validator(mode="after")
    def validate_form(self) -> "SpaceSchema":
        """Reject forms of the wrong shape and name the first non-hermitian entry."""
        J = decode_matrix(self.J)
        if J.shape != (self.n, self.n):
            raise ValueError(f"J has shape {J.shape}, expected ({self.n}, {self.n})")
        if self.field == "R" and np.iscomplexobj(J) and np.any(J.imag != 0):
            raise ValueError("J has complex entries but field is R")
        defect = np.abs(J - J.conj().T)
        if np.any(defect > 0):
            a, b = np.unravel_index(int(np.argmax(defect)), defect.shape)
            raise ValueError(
                f"J is not hermitian at entry ({a + 1},{b + 1}): "
                f"J[{a + 1},{b + 1}] != conj(J[{b + 1},{a + 1}])"
            )
        return self

    def to_space(self) -> HermitianSpace:
        return HermitianSpace(ScalarField(self.field), decode_matrix(self.J))

    @classmethod
    def from_space(cls, space: HermitianSpace) -> "SpaceSchema":
        return cls(field=space.field.value, n=space.n, J=encode_matrix(space.J))


class PointFile(BaseSchema):
    """A subspace given by its ambient space and an n x k representative."""
    space: SpaceSchema
    matrix: MatrixRows

    @model_validator(mode="after")
    def validate_rows(self) -> "PointFile":
        rows = len(self.matrix)
        if rows != self.space.n:
            raise ValueError(f"matrix has {rows} rows, expected n = {self.space.n}")
        return self

    def to_point(self) -> GrassmannPoint:
        return GrassmannPoint(self.space.to_space(), decode_matrix(self.matrix))


class TangentFile(BaseSchema):
    """An n x k matrix tau whose columns are images of the base columns."""
    matrix: MatrixRows


class GramInput(BaseSchema):
    """Gram matrix of the poles of a cyclic polyhedron."""
    gram: List[List[float]]

    @field_validator("gram")
    @classmethod
    def validate_gram(cls, value: List[List[float]]) -> List[List[float]]:
        """Require a square symmetric matrix and name the first asymmetric pair."""
        n = len(value)
        for index, row in enumerate(value):
            if len(row) != n:
                raise ValueError(f"gram row {index + 1} has {len(row)} entries, expected {n}")
        for a in range(n):
            for b in range(a + 1, n):
                if value[a][b] != value[b][a]:
                    raise ValueError(f"gram is not symmetric at ({a + 1},{b + 1})")
        return value

    def to_polyhedron(self) -> GramPolyhedron:
        return GramPolyhedron(np.array(self.gram, dtype=np.float64))


# ============== Verification Schemas ==============

class SuiteConfig(BaseSchema):
    """Configuration of one verification run."""
    suite: str
    seed: int = Field(0, ge=0, le=2**64 - 1)
    trials: int = Field(5, ge=1)
    tol: Dict[str, float] = Field(default_factory=dict)
    field: Literal["R", "C", "both"] = "both"
    max_n: int = Field(6, ge=2)
    max_k: int = Field(3, ge=1)
    workers: int = Field(1, ge=1)
    keep_instances: bool = False
    oracle_samples: Optional[int] = Field(None, ge=1)

    @field_validator("max_n")
    @classmethod
    def validate_max_n(cls, value: int) -> int:
        if value > settings.MAX_N:
            raise ValueError(f"max_n={value} exceeds the dense wedge limit MAX_N={settings.MAX_N}")
        return value

    @model_validator(mode="after")
    def validate_bounds(self) -> "SuiteConfig":
        if self.max_k >= self.max_n:
            raise ValueError("max_k must be smaller than max_n")
        return self

    def tolerance(self, check: str, default: float) -> float:
        return override_tolerance(self.tol, check, default)

    def fields(self) -> List[ScalarField]:
        if self.field == "both":
            return [ScalarField.REAL, ScalarField.COMPLEX]
        return [ScalarField(self.field)]


class InstanceSchema(BaseSchema):
    """Serialized random instance, enough to recompute a residual."""
    field: Literal["R", "C"]
    arrays: Dict[str, MatrixRows]
    params: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def from_instance(cls, instance: Instance) -> "InstanceSchema":
        return cls(
            field=instance.field.value,
            arrays={name: encode_matrix(a) for name, a in instance.arrays.items()},
            params=dict(instance.params),
        )

    def to_instance(self) -> Instance:
        dtype = ScalarField(self.field).dtype
        return Instance(
            field=ScalarField(self.field),
            arrays={name: decode_matrix(rows).astype(dtype) for name, rows in self.arrays.items()},
            params=dict(self.params),
        )


class CheckRecord(BaseSchema):
    """Outcome of one check on one random instance."""
    name: str
    suite: str
    anchor: str
    trial: int
    seed: int
    residual: Optional[float] = None
    tolerance: float
    passed: bool
    params: Dict[str, float] = Field(default_factory=dict)
    instance: Optional[InstanceSchema] = None
    error: Optional[str] = None


class Report(BaseSchema):
    """Aggregate result of a verification run."""
    command: List[str]
    suite: str
    seed: int
    trials: int
    records: List[CheckRecord]
    total: int = 0
    failures: int = 0
    passed: bool = False
    elapsed_seconds: float = 0.0

    @model_validator(mode="after")
    def aggregate(self) -> "Report":
        """The aggregate verdict is derived from the records, never set by hand."""
        self.total = len(self.records)
        self.failures = sum(1 for r in self.records if not r.passed)
        self.passed = self.failures == 0
        return self


class ReplayResult(BaseSchema):
    """Recomputed residual of a stored record."""
    name: str
    seed: int
    stored_residual: Optional[float]
    residual: float
    tolerance: float
    passed: bool
    reproduced: bool


# ============== Geodesic Schemas ==============

class SpineRow(BaseSchema):
    """One row of the spine table (index is 1-based)."""
    index: int
    lam: float
    kind: str
    speed: float
    sign: int


class SampleRow(BaseSchema):
    s: float
    matrix: MatrixRows


class GeodesicReport(BaseSchema):
    """Spines, sampled representatives and verification residuals of a geodesic."""
    command: List[str]
    spines: List[SpineRow]
    samples: List[SampleRow]
    residual: float
    speed_defect: float
    contract_defect: float
    tolerance: float
    passed: bool
    notes: List[str] = Field(default_factory=list)
    elapsed_seconds: float = 0.0


# ============== Convexity Schemas ==============

class ConditionRecordSchema(BaseSchema):
    """One inequality of the convexity criterion; indices are 1-based."""
    condition: str
    indices: List[int]
    status: str
    values: Dict[str, float]
    reason: Optional[str] = None

    @classmethod
    def from_record(cls, record: ConditionRecord) -> "ConditionRecordSchema":
        return cls(
            condition=record.condition,
            indices=list(record.indices),
            status=record.status.value,
            values=dict(record.values),
            reason=record.reason,
        )


class OracleSummary(BaseSchema):
    """Monte Carlo cross-check of one face pair (indices are 1-based)."""
    i: int
    j: int
    verdict: str
    members: int
    positive: int
    negative: int
    samples: int
    crossings: int = 0
    margin: Optional[float] = None
    criterion_passed: bool
    agrees: Optional[bool] = None


class ConvexityReportSchema(BaseSchema):
    """Verdict, per-condition table and optional oracle summary."""
    command: List[str]
    n: int
    verdict: str
    strongly_convex: bool
    records: List[ConditionRecordSchema]
    witnesses: List[ConditionRecordSchema]
    oracle: List[OracleSummary] = Field(default_factory=list)
    elapsed_seconds: float = 0.0
