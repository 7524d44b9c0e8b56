"""
Fixture script for grassgeo.

Writes the shipped JSON instances under fixtures/. The script is idempotent:
every file is rewritten from the definitions below.

- Gram matrices: a convex pentagon, the identity square (not convex) and a
  signature (4,2) matrix that has no realization in R^(4,1).
- Geodesic inputs: spherical plus hyperbolic spines, a euclidean spine, a
  zero tangent and a non-generic tangent with complex eigenvalues.
- The convexity report of the pentagon, compared against by the CLI tests.
"""
import io
import json
import sys
from contextlib import redirect_stdout
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from grassgeo.main import main
from grassgeo.schemas.schemas import GramInput, PointFile, TangentFile, encode_matrix


FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures"


def pentagon_gram() -> np.ndarray:
    n = 5
    U = np.eye(n)
    for i in range(n):
        U[i, (i + 2) % n] = U[(i + 2) % n, i] = -1.5
    return U


def signature_4_2_gram() -> np.ndarray:
    block = np.array([[1.0, 2.0], [2.0, 1.0]])
    U = np.eye(6)
    U[:2, :2] = block
    U[2:4, 2:4] = block
    return U


def unit(n: int, *indices: int) -> np.ndarray:
    """Sum of the standard basis vectors e_i (1-based)."""
    v = np.zeros(n)
    for i in indices:
        v[i - 1] = 1.0
    return v


def point_payload(signs: List[float], columns: List[np.ndarray]) -> Dict[str, Any]:
    space = {"field": "R", "n": len(signs), "J": encode_matrix(np.diag(signs))}
    return {"space": space, "matrix": encode_matrix(np.column_stack(columns))}


def tangent_payload(columns: List[np.ndarray]) -> Dict[str, Any]:
    return {"matrix": encode_matrix(np.column_stack(columns))}


def fixtures() -> Dict[str, Dict[str, Any]]:
    return {
        "convex_pentagon": {"gram": pentagon_gram().tolist()},
        "identity_square": {"gram": np.eye(4).tolist()},
        "signature_4_2": {"gram": signature_4_2_gram().tolist()},
        "mixed_point": point_payload([1, 1, 1, -1], [unit(4, 1), unit(4, 2)]),
        "mixed_tangent": tangent_payload([0.5 * unit(4, 3), 0.8 * unit(4, 4)]),
        "zero_tangent": tangent_payload([unit(4), unit(4)]),
        "euclidean_point": point_payload([1, 1, -1], [unit(3, 1)]),
        "euclidean_tangent": tangent_payload([unit(3, 2, 3)]),
        "nongeneric_point": point_payload([1, 1, -1, -1], [unit(4, 1), unit(4, 3)]),
        "nongeneric_tangent": tangent_payload([unit(4, 2), unit(4, 2, 4)]),
    }


def validate(name: str, payload: Dict[str, Any]) -> None:
    if "gram" in payload:
        GramInput.model_validate(payload)
    elif "space" in payload:
        PointFile.model_validate(payload)
    else:
        TangentFile.model_validate(payload)


def pentagon_report() -> Dict[str, Any]:
    """Report of `grassgeo convexity fixtures/convex_pentagon.json` without its timing."""
    out = io.StringIO()
    with redirect_stdout(out):
        main(["convexity", str(FIXTURE_DIR / "convex_pentagon.json"), "--quiet"])
    report = json.loads(out.getvalue())
    report.pop("elapsed_seconds")
    report["command"] = ["grassgeo", "convexity", "fixtures/convex_pentagon.json"]
    return report


def write_fixtures() -> None:
    """Validate and write every fixture, then the golden pentagon report."""
    FIXTURE_DIR.mkdir(exist_ok=True)
    for name, payload in fixtures().items():
        validate(name, payload)
        path = FIXTURE_DIR / f"{name}.json"
        path.write_text(json.dumps(payload, indent=2) + "\n")
        print(f"wrote {path.relative_to(FIXTURE_DIR.parent)}")

    path = FIXTURE_DIR / "convex_pentagon.report.json"
    path.write_text(json.dumps(pentagon_report(), sort_keys=True, indent=2) + "\n")
    print(f"wrote {path.relative_to(FIXTURE_DIR.parent)}")


if __name__ == "__main__":
    write_fixtures()
    sys.exit(0)
