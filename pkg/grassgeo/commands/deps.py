"""
Input loaders shared by the commands.

Every loader validates its payload with the pydantic schemas and turns
validation failures into usage errors that name the offending field.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from pydantic import BaseModel, ValidationError

from grassgeo.core.errors import UsageError
from grassgeo.models.models import GramPolyhedron, GrassmannPoint, TangentVector
from grassgeo.schemas.schemas import CheckRecord, GramInput, PointFile, Report, TangentFile, decode_matrix


logger = logging.getLogger(__name__)


def describe_validation_error(exc: ValidationError) -> str:
    """One line per error: dotted field path, then the message."""
    parts = []
    for error in exc.errors():
        path = ".".join(str(part) for part in error["loc"]) or "<root>"
        parts.append(f"{path}: {error['msg']}")
    return "; ".join(parts)


def load_json(path: Union[str, Path]) -> Any:
    """
    Read a JSON document.

    Raises:
        UsageError: If the file is missing or is not valid JSON (with line and column)
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def parse_model(model: type, payload: Any, source: str) -> BaseModel:
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        raise UsageError(f"{source}: {describe_validation_error(exc)}") from exc


def load_point(path: Union[str, Path]) -> GrassmannPoint:
    point_file = parse_model(PointFile, load_json(path), str(path))
    return point_file.to_point()


def load_tangent(path: Union[str, Path], point: GrassmannPoint) -> TangentVector:
    """Load an n x k tangent matrix and attach it to ``point``."""
    tangent_file = parse_model(TangentFile, load_json(path), str(path))
    try:
        tau = decode_matrix(tangent_file.matrix)
    except ValueError as exc:
        raise UsageError(f"{path}: matrix: {exc}") from exc
    return TangentVector(point, tau)


def load_gram(path: Union[str, Path]) -> GramPolyhedron:
    gram = parse_model(GramInput, load_json(path), str(path))
    return gram.to_polyhedron()


def load_records(path: Union[str, Path]) -> List[CheckRecord]:
    """
    Load a single check record, or every record of a stored report.
    """
    payload: Dict[str, Any] = load_json(path)
    if isinstance(payload, dict) and "records" in payload:
        report = parse_model(Report, payload, str(path))
        logger.debug("loaded report %s with %d records", path, len(report.records))
        return list(report.records)
    return [parse_model(CheckRecord, payload, str(path))]
